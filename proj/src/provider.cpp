// SPDX-License-Identifier: Apache-2.0
#include "musa/provider.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "musa/digest.hpp"
#include "musa/serialize.hpp"

namespace musa {

bool EmbeddingVector::valid() const noexcept {
  if (components.size() < 2) return false;
  for (double c : components) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

std::string ProviderRequest::flat_text() const {
  std::string out = system_role;
  for (const auto& m : messages) {
    out += '\n';
    if (m.is_text()) {
      out += m.text.value_or("");
    } else if (m.image) {
      out += "[image " + m.image->location + " " + m.image->media_type + "]";
    }
  }
  return out;
}

std::string_view provider_error_name(ProviderErrorKind kind) noexcept {
  switch (kind) {
    case ProviderErrorKind::Transport: return "transport error";
    case ProviderErrorKind::Authentication: return "authentication error";
    case ProviderErrorKind::ImageUnsupported: return "image-unsupported error";
    case ProviderErrorKind::ScriptExhausted: return "mock-script-exhausted error";
    case ProviderErrorKind::ScriptMismatch: return "mock-script-mismatch error";
    case ProviderErrorKind::EmptyText: return "empty-text error";
    case ProviderErrorKind::InvalidRequest: return "invalid-request error";
    case ProviderErrorKind::Http: return "http error";
    case ProviderErrorKind::BadResponse: return "bad-response error";
  }
  return "provider error";
}

ProviderError::ProviderError(ProviderErrorKind kind, const std::string& message, int attempts, int http_status)
    : Error(std::string(provider_error_name(kind)) + ": " + message),
      kind_(kind),
      attempts_(attempts),
      http_status_(http_status),
      detail_(message) {}

// ---------------------------------------------------------------------------
// MockScript / MockProvider

MockScript::MockScript(std::vector<MockEntry> entries) : entries_(std::move(entries)) {}

std::string MockScript::next(const ProviderRequest& request) {
  std::lock_guard lock(mutex_);
  if (cursor_ >= entries_.size()) {
    throw ProviderError(ProviderErrorKind::ScriptExhausted,
                        "script of " + std::to_string(entries_.size()) + " entries is exhausted");
  }
  const MockEntry& entry = entries_[cursor_];
  if (entry.match && request.flat_text().find(*entry.match) == std::string::npos) {
    throw ProviderError(ProviderErrorKind::ScriptMismatch,
                        "entry " + std::to_string(cursor_) + " expects a request containing '" + *entry.match + "'");
  }
  ++cursor_;
  recorded_.push_back(RecordedCall{request, entry.response});
  return entry.response;
}

std::size_t MockScript::remaining() const {
  std::lock_guard lock(mutex_);
  return entries_.size() - cursor_;
}

std::vector<RecordedCall> MockScript::recorded_calls() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

namespace {

const std::vector<MockEntry>& select_script(const MockSettings& settings, std::string_view task_id) {
  if (!task_id.empty()) {
    auto it = settings.scripts_by_task.find(std::string(task_id));
    if (it != settings.scripts_by_task.end()) return it->second;
  }
  return settings.script;
}

}  // namespace

MockProvider::MockProvider(ProviderConfig config, std::string_view task_id)
    : config_(std::move(config)), script_(select_script(config_.mock, task_id)) {}

ProviderResponse MockProvider::complete(const ProviderRequest& request) {
  ProviderResponse response;
  response.text = script_.next(request);
  return response;
}

EmbeddingVector MockProvider::hash_embedding(std::string_view text, int dimension, std::uint64_t seed) {
  EmbeddingVector v;
  v.components.reserve(static_cast<std::size_t>(dimension));
  std::uint64_t state = seed ^ fnv1a64(text);
  for (int i = 0; i < dimension; ++i) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;  // [0,1)
    v.components.push_back(2.0 * unit - 1.0);
  }
  return v;
}

EmbeddingVector MockProvider::embed(std::string_view text) {
  for (const auto& o : config_.mock.embedding_overrides) {
    if (text.find(o.match) != std::string_view::npos) {
      if (static_cast<int>(o.vector.size()) != config_.mock.embedding_dim)
        throw ProviderError(ProviderErrorKind::InvalidRequest, "embedding override has wrong dimension");
      return EmbeddingVector{o.vector};
    }
  }
  return hash_embedding(text, config_.mock.embedding_dim, config_.mock.seed);
}

// ---------------------------------------------------------------------------
// HTTP transport

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderError(ProviderErrorKind::InvalidRequest, "bad URL '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool is_remote_location(const std::string& location) {
  return location.rfind("http://", 0) == 0 || location.rfind("https://", 0) == 0 || location.rfind("data:", 0) == 0;
}

}  // namespace

HttpResult HttplibTransport::post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                                  int timeout_seconds) {
  const auto parsed = split_url(url);
  httplib::Client client(parsed.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(parsed.path, h, body, "application/json");
  if (!res) {
    throw ProviderError(ProviderErrorKind::Transport, "POST " + url + " failed: " + httplib::to_string(res.error()));
  }
  return HttpResult{res->status, res->body};
}

// ---------------------------------------------------------------------------
// HttpChatProvider

HttpChatProvider::HttpChatProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()) {}

std::string HttpChatProvider::api_key() const {
  if (config_.api_key_env.empty())
    throw ProviderError(ProviderErrorKind::Authentication, "no api_key_env configured for " + config_.model_name);
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw ProviderError(ProviderErrorKind::Authentication, "environment variable " + config_.api_key_env + " is not set");
  return key;
}

std::string HttpChatProvider::build_chat_body(const ProviderConfig& config, const ProviderRequest& request) {
  Json parts = Json::array();
  for (const auto& m : request.messages) {
    if (m.is_text()) {
      parts.push_back(Json{{"type", "text"}, {"text", m.text.value_or("")}});
      continue;
    }
    const ImageRef& image = *m.image;
    std::string url = image.location;
    if (!is_remote_location(url)) {
      std::string bytes;
      try {
        bytes = read_text_file(image.location);
      } catch (const Error& e) {
        throw ProviderError(ProviderErrorKind::InvalidRequest, e.what());
      }
      url = "data:" + image.media_type + ";base64," + base64_encode(bytes);
    }
    parts.push_back(Json{{"type", "image_url"}, {"image_url", Json{{"url", url}}}});
  }
  Json messages = Json::array();
  messages.push_back(Json{{"role", "system"}, {"content", request.system_role}});
  messages.push_back(Json{{"role", "user"}, {"content", parts}});
  Json body{{"model", config.model_name},
            {"messages", messages},
            {"temperature", request.sampling.temperature},
            {"top_p", request.sampling.top_p}};
  return body.dump();
}

ProviderResponse HttpChatProvider::parse_chat_response(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ProviderError(ProviderErrorKind::BadResponse, std::string("unparseable body: ") + e.what());
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty())
    throw ProviderError(ProviderErrorKind::BadResponse, "response has no choices");
  const Json& message = (*choices)[0].value("message", Json::object());
  const auto content = message.find("content");
  if (content == message.end()) throw ProviderError(ProviderErrorKind::BadResponse, "first choice has no content");

  ProviderResponse response;
  if (content->is_string()) {
    response.text = content->get<std::string>();
  } else if (content->is_array()) {
    for (const auto& part : *content) {
      if (part.is_object() && part.value("type", "") == "text") response.text += part.value("text", "");
    }
  } else if (!content->is_null()) {
    throw ProviderError(ProviderErrorKind::BadResponse, "content has unexpected type");
  }
  if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
    response.usage = TokenUsage{usage->value("prompt_tokens", 0), usage->value("completion_tokens", 0)};
  }
  return response;
}

HttpResult HttpChatProvider::send(const std::string& url, const std::string& body) const {
  const HttpHeaders headers{{"Authorization", "Bearer " + api_key()}, {"Accept", "application/json"}};
  HttpResult result = transport_->post(url, headers, body, config_.timeout_seconds);
  if (result.status >= 200 && result.status < 300) return result;
  const std::string msg = "HTTP " + std::to_string(result.status) + " from " + url;
  if (result.status == 401 || result.status == 403)
    throw ProviderError(ProviderErrorKind::Authentication, msg, 1, result.status);
  if (result.status >= 500) throw ProviderError(ProviderErrorKind::Transport, msg, 1, result.status);
  throw ProviderError(ProviderErrorKind::Http, msg, 1, result.status);
}

ProviderResponse HttpChatProvider::complete(const ProviderRequest& request) {
  api_key();  // fail before building or sending anything
  check_request(config_, request);
  const auto start = std::chrono::steady_clock::now();
  HttpResult result = send(config_.endpoint, build_chat_body(config_, request));
  ProviderResponse response = parse_chat_response(result.body);
  response.latency =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
  return response;
}

EmbeddingVector HttpChatProvider::embed(std::string_view text) {
  if (text.empty()) throw ProviderError(ProviderErrorKind::EmptyText, "cannot embed empty text");
  api_key();
  if (config_.embedding_endpoint.empty())
    throw ProviderError(ProviderErrorKind::InvalidRequest, "no embedding_endpoint configured for " + config_.model_name);
  const Json body{{"model", config_.embedding_model.empty() ? config_.model_name : config_.embedding_model},
                  {"input", std::string(text)}};
  HttpResult result = send(config_.embedding_endpoint, body.dump());
  try {
    const Json j = Json::parse(result.body);
    return EmbeddingVector{j.at("data").at(0).at("embedding").get<std::vector<double>>()};
  } catch (const Json::exception& e) {
    throw ProviderError(ProviderErrorKind::BadResponse, std::string("embedding response: ") + e.what());
  }
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, std::string_view task_id) {
  const auto report = validate_provider_config(config);
  if (!report.ok()) throw ConfigError("provider '" + config.model_name + "': " + report.problems.front());
  if (config.backend == Backend::Mock) return std::make_unique<MockProvider>(config, task_id);
  return std::make_unique<HttpChatProvider>(config);
}

// ---------------------------------------------------------------------------
// UnitChannel

void check_request(const ProviderConfig& config, const ProviderRequest& request) {
  if (request.messages.empty()) throw ProviderError(ProviderErrorKind::InvalidRequest, "request has no messages");
  if (request.system_role.empty()) throw ProviderError(ProviderErrorKind::InvalidRequest, "system role is not set");
  for (const auto& m : request.messages) {
    if (!m.valid()) throw ProviderError(ProviderErrorKind::InvalidRequest, "malformed content item");
    if (m.is_image() && !config.supports_images)
      throw ProviderError(ProviderErrorKind::ImageUnsupported,
                          "model " + config.model_name + " does not accept image content");
  }
}

UnitChannel::UnitChannel(Provider& provider, UnitRole role, Transcript* transcript, RetryPolicy retry)
    : provider_(&provider), role_(role), transcript_(transcript), retry_(retry) {}

ProviderRequest UnitChannel::request_for(const PromptArtifact& prompt, ImagePolicy policy) const {
  ProviderRequest request;
  request.system_role = system_role_.empty() ? prompt.system_role : system_role_;
  request.sampling = config().sampling;
  request.messages.reserve(prompt.segments.size());
  for (const auto& seg : prompt.segments) {
    if (seg.is_image() && policy == ImagePolicy::Describe && !config().supports_images) {
      request.messages.push_back(
          ContentItem::make_text("[image: " + seg.image->location + " (" + seg.image->media_type + ")]"));
    } else {
      request.messages.push_back(seg);
    }
  }
  return request;
}

ProviderResponse UnitChannel::complete(std::string_view operation, ProviderRequest request) const {
  if (!system_role_.empty()) request.system_role = system_role_;
  check_request(config(), request);
  const std::string request_digest = short_digest(request.flat_text());
  for (int attempt = 1;; ++attempt) {
    try {
      ProviderResponse response = provider_->complete(request);
      if (transcript_)
        transcript_->record_call(role_, std::string(operation), attempt, CallStatus::Ok, request_digest,
                                 short_digest(response.text));
      return response;
    } catch (const ProviderError& e) {
      if (transcript_)
        transcript_->record_call(role_, std::string(operation), attempt, CallStatus::Failed, request_digest, {},
                                 e.what());
      if (!e.retryable() || attempt >= retry_.max_attempts)
        throw ProviderError(e.kind(), std::string(operation) + ": " + e.detail(), attempt, e.http_status());
      std::this_thread::sleep_for(retry_.base_delay * (1 << (attempt - 1)));
    }
  }
}

EmbeddingVector UnitChannel::embed(std::string_view operation, std::string_view text) const {
  if (text.empty()) throw ProviderError(ProviderErrorKind::EmptyText, "cannot embed empty text");
  const std::string request_digest = short_digest(text);
  for (int attempt = 1;; ++attempt) {
    try {
      EmbeddingVector v = provider_->embed(text);
      if (!v.valid()) throw ProviderError(ProviderErrorKind::BadResponse, "embedding has dimension < 2 or non-finite values");
      if (transcript_) {
        std::string flat;
        for (double c : v.components) flat += std::to_string(c) + ",";
        transcript_->record_call(role_, std::string(operation), attempt, CallStatus::Ok, request_digest,
                                 short_digest(flat));
      }
      return v;
    } catch (const ProviderError& e) {
      if (transcript_)
        transcript_->record_call(role_, std::string(operation), attempt, CallStatus::Failed, request_digest, {},
                                 e.what());
      if (!e.retryable() || attempt >= retry_.max_attempts)
        throw ProviderError(e.kind(), std::string(operation) + ": " + e.detail(), attempt, e.http_status());
      std::this_thread::sleep_for(retry_.base_delay * (1 << (attempt - 1)));
    }
  }
}

}  // namespace musa
