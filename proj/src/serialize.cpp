// SPDX-License-Identifier: Apache-2.0
#include "musa/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace musa {
namespace {

template <typename E, std::size_t N>
std::string enum_text(E value, const std::pair<E, const char*> (&table)[N]) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  throw Error("unmapped enum value");
}

template <typename E, std::size_t N>
E enum_value(const Json& j, const char* what, const std::pair<E, const char*> (&table)[N]) {
  const auto text = j.get<std::string>();
  for (const auto& [e, name] : table) {
    if (text == name) return e;
  }
  throw MalformedInputError(std::string("unknown ") + what + " '" + text + "'", 0);
}

constexpr std::pair<ContentKind, const char*> kContentKinds[] = {{ContentKind::Text, "text"},
                                                                 {ContentKind::ImageRef, "image"}};
constexpr std::pair<Provenance, const char*> kProvenances[] = {
    {Provenance::UserTask, "UserTask"},
    {Provenance::PlannerOutput, "PlannerOutput"},
    {Provenance::OptimizerFeedback, "OptimizerFeedback"},
    {Provenance::CriticFeedback, "CriticFeedback"},
    {Provenance::RefinerOutput, "RefinerOutput"}};
constexpr std::pair<Backend, const char*> kBackends[] = {{Backend::Mock, "mock"}, {Backend::HttpChat, "http_chat"}};
constexpr std::pair<ProviderProfile, const char*> kProfiles[] = {{ProviderProfile::Deterministic, "deterministic"},
                                                                 {ProviderProfile::Creative, "creative"}};
constexpr std::pair<EventKind, const char*> kEventKinds[] = {{EventKind::Call, "call"},
                                                             {EventKind::Decision, "decision"}};
constexpr std::pair<CallStatus, const char*> kStatuses[] = {{CallStatus::Ok, "ok"}, {CallStatus::Failed, "failed"}};

// Reads an optional field, leaving the default when absent or null.
template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it != j.end() && !it->is_null()) out = it->get<T>();
}

template <typename T>
void read_req(const Json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedInputError(std::string("missing field '") + key + "'", 0);
  out = it->get<T>();
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw MalformedInputError(std::string(what) + " must be an object", 0);
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

void to_json(Json& j, const ImageRef& v) { j = Json{{"location", v.location}, {"media_type", v.media_type}}; }

void from_json(const Json& j, ImageRef& v) {
  require_object(j, "image");
  read_req(j, "location", v.location);
  read_req(j, "media_type", v.media_type);
}

void to_json(Json& j, const ContentItem& v) {
  j = Json{{"kind", enum_text(v.kind, kContentKinds)}};
  if (v.is_text()) {
    j["text"] = v.text.value_or("");
  } else {
    j["image"] = v.image.value_or(ImageRef{});
  }
}

void from_json(const Json& j, ContentItem& v) {
  require_object(j, "content item");
  v = ContentItem{};
  v.kind = enum_value(j.at("kind"), "content kind", kContentKinds);
  if (v.is_text()) {
    std::string text;
    read_req(j, "text", text);
    v.text = std::move(text);
  } else {
    ImageRef image;
    read_req(j, "image", image);
    v.image = std::move(image);
  }
  if (!v.valid()) throw MalformedInputError("content item does not match its kind", 0);
}

void to_json(Json& j, const ActionSpec& v) {
  j = Json{{"id", v.id()},
           {"name", std::string(action_name(v.kind))},
           {"instructions", v.instructions},
           {"inputs", v.inputs}};
}

void from_json(const Json& j, ActionSpec& v) {
  require_object(j, "action");
  int id = 0;
  read_req(j, "id", id);
  auto kind = action_from_id(id);
  if (!kind) throw MalformedInputError("unknown action id " + std::to_string(id), 0);
  auto name_it = j.find("name");
  if (name_it != j.end() && action_from_name(name_it->get<std::string>()) != kind)
    throw MalformedInputError("action id/name mismatch for id " + std::to_string(id), 0);
  v.kind = *kind;
  read_req(j, "instructions", v.instructions);
  v.inputs.clear();
  read_opt(j, "inputs", v.inputs);
}

void to_json(Json& j, const Plan& v) { j = Json{{"actions", v.actions}, {"rationale", v.rationale}, {"raw", v.raw}}; }

void from_json(const Json& j, Plan& v) {
  require_object(j, "plan");
  read_req(j, "actions", v.actions);
  v.rationale.clear();
  v.raw.clear();
  read_opt(j, "rationale", v.rationale);
  read_opt(j, "raw", v.raw);
}

void to_json(Json& j, const Task& v) {
  j = Json{{"id", v.id}, {"goal", v.goal}, {"inputs", v.inputs}, {"allowed_actions", optional_json(v.allowed_actions)}};
}

void from_json(const Json& j, Task& v) {
  require_object(j, "task");
  v = Task{};
  read_opt(j, "id", v.id);
  read_req(j, "goal", v.goal);
  read_opt(j, "inputs", v.inputs);
  auto it = j.find("allowed_actions");
  if (it != j.end() && !it->is_null()) v.allowed_actions = it->get<std::set<int>>();
}

void to_json(Json& j, const EnvironmentContext& v) {
  j = Json{{"description", v.description}, {"knowledge_refs", v.knowledge_refs}};
}

void from_json(const Json& j, EnvironmentContext& v) {
  require_object(j, "environment");
  v = EnvironmentContext{};
  read_opt(j, "description", v.description);
  read_opt(j, "knowledge_refs", v.knowledge_refs);
}

void to_json(Json& j, const FewShotExample& v) { j = Json{{"input", v.input}, {"output", v.output}}; }

void from_json(const Json& j, FewShotExample& v) {
  require_object(j, "example");
  read_req(j, "input", v.input);
  read_req(j, "output", v.output);
}

void to_json(Json& j, const ReasoningStrategy& v) {
  j = Json{{"kind", std::string(strategy_name(v.kind))}, {"examples", v.examples}};
}

void from_json(const Json& j, ReasoningStrategy& v) {
  v = ReasoningStrategy{};
  if (j.is_string()) {
    auto kind = strategy_from_name(j.get<std::string>());
    if (!kind) throw MalformedInputError("unknown strategy '" + j.get<std::string>() + "'", 0);
    v.kind = *kind;
  } else {
    require_object(j, "strategy");
    auto name = j.at("kind").get<std::string>();
    auto kind = strategy_from_name(name);
    if (!kind) throw MalformedInputError("unknown strategy '" + name + "'", 0);
    v.kind = *kind;
    read_opt(j, "examples", v.examples);
  }
  if (!v.valid()) throw MalformedInputError("strategy '" + std::string(strategy_name(v.kind)) + "' is invalid", 0);
}

void to_json(Json& j, const PromptArtifact& v) {
  j = Json{{"system_role", v.system_role},
           {"segments", v.segments},
           {"strategy", v.strategy},
           {"provenance", enum_text(v.provenance, kProvenances)}};
}

void from_json(const Json& j, PromptArtifact& v) {
  require_object(j, "prompt");
  v = PromptArtifact{};
  read_opt(j, "system_role", v.system_role);
  read_req(j, "segments", v.segments);
  read_opt(j, "strategy", v.strategy);
  if (j.contains("provenance")) v.provenance = enum_value(j.at("provenance"), "provenance", kProvenances);
}

void to_json(Json& j, const SamplingConfig& v) { j = Json{{"temperature", v.temperature}, {"top_p", v.top_p}}; }

void from_json(const Json& j, SamplingConfig& v) {
  require_object(j, "sampling");
  read_opt(j, "temperature", v.temperature);
  read_opt(j, "top_p", v.top_p);
}

void to_json(Json& j, const MockEntry& v) { j = Json{{"match", optional_json(v.match)}, {"response", v.response}}; }

void from_json(const Json& j, MockEntry& v) {
  v = MockEntry{};
  if (j.is_string()) {
    v.response = j.get<std::string>();
    return;
  }
  require_object(j, "mock entry");
  read_req(j, "response", v.response);
  auto it = j.find("match");
  if (it != j.end() && !it->is_null()) v.match = it->get<std::string>();
}

void to_json(Json& j, const EmbeddingOverride& v) { j = Json{{"match", v.match}, {"vector", v.vector}}; }

void from_json(const Json& j, EmbeddingOverride& v) {
  require_object(j, "embedding override");
  read_req(j, "match", v.match);
  read_req(j, "vector", v.vector);
}

void to_json(Json& j, const MockSettings& v) {
  j = Json{{"script", v.script},
           {"scripts_by_task", v.scripts_by_task},
           {"embedding_dim", v.embedding_dim},
           {"embedding_overrides", v.embedding_overrides},
           {"seed", v.seed}};
}

void from_json(const Json& j, MockSettings& v) {
  require_object(j, "mock settings");
  v = MockSettings{};
  read_opt(j, "script", v.script);
  read_opt(j, "scripts_by_task", v.scripts_by_task);
  read_opt(j, "embedding_dim", v.embedding_dim);
  read_opt(j, "embedding_overrides", v.embedding_overrides);
  read_opt(j, "seed", v.seed);
}

void to_json(Json& j, const ProviderConfig& v) {
  j = Json{{"backend", enum_text(v.backend, kBackends)},
           {"model_name", v.model_name},
           {"endpoint", v.endpoint},
           {"api_key_env", v.api_key_env},
           {"embedding_endpoint", v.embedding_endpoint},
           {"embedding_model", v.embedding_model},
           {"profile", enum_text(v.profile, kProfiles)},
           {"sampling", v.sampling},
           {"supports_images", v.supports_images},
           {"timeout_seconds", v.timeout_seconds},
           {"mock", v.mock}};
}

void from_json(const Json& j, ProviderConfig& v) {
  require_object(j, "provider");
  v = ProviderConfig{};
  if (j.contains("backend")) v.backend = enum_value(j.at("backend"), "backend", kBackends);
  read_req(j, "model_name", v.model_name);
  read_opt(j, "endpoint", v.endpoint);
  read_opt(j, "api_key_env", v.api_key_env);
  read_opt(j, "embedding_endpoint", v.embedding_endpoint);
  read_opt(j, "embedding_model", v.embedding_model);
  if (j.contains("profile")) v.profile = enum_value(j.at("profile"), "profile", kProfiles);
  // Sampling defaults follow the profile; explicit fields override.
  v.sampling = SamplingConfig::for_profile(v.profile);
  read_opt(j, "sampling", v.sampling);
  read_opt(j, "supports_images", v.supports_images);
  read_opt(j, "timeout_seconds", v.timeout_seconds);
  read_opt(j, "mock", v.mock);
}

void to_json(Json& j, const EngineConfig& v) {
  Json bindings = Json::object();
  for (const auto& [role, cfg] : v.role_bindings) bindings[std::string(role_name(role))] = cfg;
  j = Json{{"theta", v.theta},
           {"trials", v.trials},
           {"tgd_iterations", v.tgd_iterations},
           {"role_bindings", bindings},
           {"embedder", optional_json(v.embedder)},
           {"step_directive", optional_json(v.step_directive)},
           {"plan_strategy", v.plan_strategy},
           {"act_strategy", v.act_strategy},
           {"loss_instruction", v.loss_instruction},
           {"early_stop_marker", v.early_stop_marker},
           {"tool_store", optional_json(v.tool_store)},
           {"taxonomy", optional_json(v.taxonomy)}};
}

void from_json(const Json& j, EngineConfig& v) {
  require_object(j, "engine config");
  v = EngineConfig{};
  read_opt(j, "theta", v.theta);
  read_opt(j, "trials", v.trials);
  read_opt(j, "tgd_iterations", v.tgd_iterations);
  if (auto it = j.find("role_bindings"); it != j.end()) {
    require_object(*it, "role_bindings");
    for (const auto& [name, cfg] : it->items()) {
      auto role = role_from_name(name);
      if (!role) throw MalformedInputError("unknown unit role '" + name + "'", 0);
      v.role_bindings[*role] = cfg.get<ProviderConfig>();
    }
  }
  if (auto it = j.find("embedder"); it != j.end() && !it->is_null()) v.embedder = it->get<ProviderConfig>();
  if (auto it = j.find("step_directive"); it != j.end() && !it->is_null()) v.step_directive = it->get<std::string>();
  read_opt(j, "plan_strategy", v.plan_strategy);
  read_opt(j, "act_strategy", v.act_strategy);
  read_opt(j, "loss_instruction", v.loss_instruction);
  read_opt(j, "early_stop_marker", v.early_stop_marker);
  if (auto it = j.find("tool_store"); it != j.end() && !it->is_null()) v.tool_store = it->get<std::string>();
  if (auto it = j.find("taxonomy"); it != j.end() && !it->is_null()) v.taxonomy = it->get<std::string>();
}

void to_json(Json& j, const TranscriptEvent& v) {
  j = Json{{"seq", v.seq},
           {"kind", enum_text(v.kind, kEventKinds)},
           {"unit", v.unit ? Json(std::string(role_name(*v.unit))) : Json(nullptr)},
           {"operation", v.operation},
           {"attempt", v.attempt},
           {"status", enum_text(v.status, kStatuses)},
           {"request_digest", v.request_digest},
           {"response_digest", v.response_digest},
           {"detail", v.detail},
           {"timestamp_us", v.timestamp_us}};
}

void from_json(const Json& j, TranscriptEvent& v) {
  require_object(j, "transcript event");
  v = TranscriptEvent{};
  read_req(j, "seq", v.seq);
  v.kind = enum_value(j.at("kind"), "event kind", kEventKinds);
  if (auto it = j.find("unit"); it != j.end() && !it->is_null()) {
    auto role = role_from_name(it->get<std::string>());
    if (!role) throw MalformedInputError("unknown unit role", 0);
    v.unit = *role;
  }
  read_req(j, "operation", v.operation);
  read_opt(j, "attempt", v.attempt);
  if (j.contains("status")) v.status = enum_value(j.at("status"), "status", kStatuses);
  read_opt(j, "request_digest", v.request_digest);
  read_opt(j, "response_digest", v.response_digest);
  read_opt(j, "detail", v.detail);
  read_opt(j, "timestamp_us", v.timestamp_us);
}

void to_json(Json& j, const Transcript& v) { j = Json(v.events()); }

// ---------------------------------------------------------------------------

std::string canonical_dump(const Json& tree) {
  return tree.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

Json parse_canonical(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw MalformedInputError(std::string("malformed input: ") + e.what(), e.byte);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

EngineConfig load_engine_config(const std::string& path) {
  EngineConfig config = load_file<EngineConfig>(path);
  // Data-file paths are relative to the config file.
  const auto base = std::filesystem::absolute(path).parent_path();
  auto resolve = [&](std::optional<std::string>& p) {
    if (p && !p->empty() && std::filesystem::path(*p).is_relative()) p = (base / *p).lexically_normal().string();
  };
  resolve(config.tool_store);
  resolve(config.taxonomy);
  return config;
}

}  // namespace musa
