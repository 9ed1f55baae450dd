// SPDX-License-Identifier: Apache-2.0
//
// Chat-completion and embedding backends.
//
// Every model exchange goes through a Provider. Units never talk to a
// Provider directly; they hold a UnitChannel, which validates requests,
// applies the retry policy, installs the run's system role and records each
// attempt in the run transcript.
#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "musa/core.hpp"
#include "musa/error.hpp"
#include "musa/transcript.hpp"

namespace musa {

struct EmbeddingVector {
  std::vector<double> components;

  std::size_t dimension() const noexcept { return components.size(); }
  /// Dimension >= 2 and every component finite.
  bool valid() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

struct ProviderRequest {
  std::string system_role;
  std::vector<ContentItem> messages;
  SamplingConfig sampling;

  /// Flattened text used for digests and mock matching.
  std::string flat_text() const;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct ProviderResponse {
  std::string text;
  std::optional<TokenUsage> usage;
  std::chrono::microseconds latency{0};
};

enum class ProviderErrorKind {
  Transport,         // connection failure or 5xx; retryable
  Authentication,    // missing key or 401/403
  ImageUnsupported,  // image content sent to a text-only backend
  ScriptExhausted,   // mock script has no entries left
  ScriptMismatch,    // mock entry matcher not found in the request
  EmptyText,         // embed() of empty text
  InvalidRequest,    // request violates its invariants
  Http,              // other 4xx
  BadResponse,       // backend answered with an unparseable body
};

std::string_view provider_error_name(ProviderErrorKind kind) noexcept;

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& message, int attempts = 1, int http_status = 0);

  ProviderErrorKind kind() const noexcept { return kind_; }
  int attempts() const noexcept { return attempts_; }
  int http_status() const noexcept { return http_status_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }
  bool retryable() const noexcept { return kind_ == ProviderErrorKind::Transport; }

 private:
  ProviderErrorKind kind_;
  int attempts_;
  int http_status_;
  std::string detail_;
};

/// Abstract model backend.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual const ProviderConfig& config() const noexcept = 0;
  virtual ProviderResponse complete(const ProviderRequest& request) = 0;
  virtual EmbeddingVector embed(std::string_view text) = 0;
};

// ---------------------------------------------------------------------------
// Scripted mock

struct RecordedCall {
  ProviderRequest request;
  std::string response;
};

/// Ordered queue of canned completions. Consumption is strictly in order and
/// serialized across threads.
class MockScript {
 public:
  MockScript() = default;
  explicit MockScript(std::vector<MockEntry> entries);

  /// Pops the next entry; throws ScriptExhausted or ScriptMismatch.
  std::string next(const ProviderRequest& request);

  std::size_t remaining() const;
  std::vector<RecordedCall> recorded_calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<MockEntry> entries_;
  std::size_t cursor_ = 0;
  std::vector<RecordedCall> recorded_;
};

/// Deterministic backend driven by MockSettings. When scripts_by_task has an
/// entry for the task id, that script is used instead of the default one.
class MockProvider final : public Provider {
 public:
  explicit MockProvider(ProviderConfig config, std::string_view task_id = {});

  const ProviderConfig& config() const noexcept override { return config_; }
  ProviderResponse complete(const ProviderRequest& request) override;
  EmbeddingVector embed(std::string_view text) override;

  MockScript& script() noexcept { return script_; }
  const MockScript& script() const noexcept { return script_; }

  /// Seeded hash embedding, ignoring overrides.
  static EmbeddingVector hash_embedding(std::string_view text, int dimension, std::uint64_t seed);

 private:
  ProviderConfig config_;
  MockScript script_;
};

// ---------------------------------------------------------------------------
// HTTP chat backend

struct HttpResult {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// POST transport. Implementations throw ProviderError(Transport) when no
/// HTTP response was obtained.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResult post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                          int timeout_seconds) = 0;
};

/// cpp-httplib backed transport (http and https).
class HttplibTransport final : public HttpTransport {
 public:
  HttpResult post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                  int timeout_seconds) override;
};

class HttpChatProvider final : public Provider {
 public:
  explicit HttpChatProvider(ProviderConfig config, std::shared_ptr<HttpTransport> transport = nullptr);

  const ProviderConfig& config() const noexcept override { return config_; }
  ProviderResponse complete(const ProviderRequest& request) override;
  EmbeddingVector embed(std::string_view text) override;

  /// JSON body of a chat-completion call; images are inlined as base64 data URLs.
  static std::string build_chat_body(const ProviderConfig& config, const ProviderRequest& request);
  /// Text of the first choice; throws BadResponse.
  static ProviderResponse parse_chat_response(const std::string& body);

 private:
  std::string api_key() const;
  HttpResult send(const std::string& url, const std::string& body) const;

  ProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, std::string_view task_id = {});

// ---------------------------------------------------------------------------
// Unit channel

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{200};
};

/// Throws InvalidRequest / ImageUnsupported when the request cannot be sent
/// to a backend with this configuration.
void check_request(const ProviderConfig& config, const ProviderRequest& request);

/// How a unit treats image content when its backend is text-only.
enum class ImagePolicy {
  Require,   // send as-is; a text-only backend rejects the request
  Describe,  // replace images with a textual reference
};

/// A provider bound to one unit role within one run.
class UnitChannel {
 public:
  UnitChannel(Provider& provider, UnitRole role, Transcript* transcript = nullptr, RetryPolicy retry = {});

  /// One logical completion, retried on transport errors. Every attempt is
  /// recorded in the transcript.
  ProviderResponse complete(std::string_view operation, ProviderRequest request) const;
  EmbeddingVector embed(std::string_view operation, std::string_view text) const;

  /// Builds a request from a prompt using this channel's role and sampling.
  ProviderRequest request_for(const PromptArtifact& prompt, ImagePolicy policy = ImagePolicy::Describe) const;

  /// Installs the role text used as system role on every later request.
  void install_system_role(std::string role) { system_role_ = std::move(role); }
  const std::string& system_role() const noexcept { return system_role_; }

  const ProviderConfig& config() const noexcept { return provider_->config(); }
  UnitRole role() const noexcept { return role_; }
  Transcript* transcript() const noexcept { return transcript_; }

 private:
  Provider* provider_;
  UnitRole role_;
  Transcript* transcript_;
  RetryPolicy retry_;
  std::string system_role_;
};

}  // namespace musa
