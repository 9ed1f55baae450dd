// SPDX-License-Identifier: Apache-2.0
//
// Domain types shared by every unit of the agent: tasks, plans, actions,
// prompts, roles, reasoning strategies and configuration.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace musa {

// ---------------------------------------------------------------------------
// Content

enum class ContentKind { Text, ImageRef };

/// An image carried by reference; bytes are only read at the wire boundary.
struct ImageRef {
  std::string location;  // filesystem path or http(s) URL
  std::string media_type;

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

/// One piece of multimodal input. Exactly one of text/image is populated.
struct ContentItem {
  ContentKind kind = ContentKind::Text;
  std::optional<std::string> text;
  std::optional<ImageRef> image;

  static ContentItem make_text(std::string text);
  static ContentItem make_image(std::string location, std::string media_type);

  bool is_text() const noexcept { return kind == ContentKind::Text; }
  bool is_image() const noexcept { return kind == ContentKind::ImageRef; }
  bool valid() const noexcept;

  friend bool operator==(const ContentItem&, const ContentItem&) = default;
};

bool contains_images(const std::vector<ContentItem>& items);

// ---------------------------------------------------------------------------
// Action space

/// The four content-analysis actions. The enumerator value is the action id.
enum class ActionKind : int { QA = 1, VQA = 2, TitleGeneration = 3, Categorization = 4 };

inline constexpr int kMinActionId = 1;
inline constexpr int kMaxActionId = 4;

std::optional<ActionKind> action_from_id(int id) noexcept;
std::optional<ActionKind> action_from_name(std::string_view name) noexcept;
std::string_view action_name(ActionKind kind) noexcept;
std::string_view action_description(ActionKind kind) noexcept;
inline int action_id(ActionKind kind) noexcept { return static_cast<int>(kind); }

struct ActionSpec {
  ActionKind kind = ActionKind::QA;
  std::string instructions;
  std::vector<ContentItem> inputs;

  int id() const noexcept { return action_id(kind); }

  friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

/// An ordered action sequence; one planning state.
struct Plan {
  std::vector<ActionSpec> actions;
  std::string rationale;
  std::string raw;  // verbatim planner output

  friend bool operator==(const Plan&, const Plan&) = default;
};

// ---------------------------------------------------------------------------
// Tasks and environment

struct Task {
  std::string id;
  std::string goal;
  std::vector<ContentItem> inputs;
  std::optional<std::set<int>> allowed_actions;  // nullopt: all four actions

  /// The action ids this task may use, in ascending order.
  std::vector<int> permitted_ids() const;

  friend bool operator==(const Task&, const Task&) = default;
};

/// Closed static environment; immutable for one task run.
struct EnvironmentContext {
  std::string description;
  std::vector<std::string> knowledge_refs;

  friend bool operator==(const EnvironmentContext&, const EnvironmentContext&) = default;
};

struct ValidationReport {
  std::vector<std::string> problems;

  bool ok() const noexcept { return problems.empty(); }
  bool mentions(std::string_view needle) const;
};

ValidationReport validate_task(const Task& task);
ValidationReport validate_plan(const Plan& plan);

// ---------------------------------------------------------------------------
// Reasoning

enum class StrategyKind { None, FewShot, ZeroShotCoT, SelfReflection, CoTAndReflection };

struct FewShotExample {
  std::string input;
  std::string output;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

struct ReasoningStrategy {
  StrategyKind kind = StrategyKind::None;
  std::vector<FewShotExample> examples;  // FewShot only, at least one

  static ReasoningStrategy none() { return {}; }
  static ReasoningStrategy zero_shot_cot() { return {StrategyKind::ZeroShotCoT, {}}; }
  static ReasoningStrategy self_reflection() { return {StrategyKind::SelfReflection, {}}; }
  static ReasoningStrategy cot_and_reflection() { return {StrategyKind::CoTAndReflection, {}}; }
  static ReasoningStrategy few_shot(std::vector<FewShotExample> examples) {
    return {StrategyKind::FewShot, std::move(examples)};
  }

  bool valid() const noexcept;

  friend bool operator==(const ReasoningStrategy&, const ReasoningStrategy&) = default;
};

std::string_view strategy_name(StrategyKind kind) noexcept;
std::optional<StrategyKind> strategy_from_name(std::string_view name) noexcept;

enum class Provenance { UserTask, PlannerOutput, OptimizerFeedback, CriticFeedback, RefinerOutput };

std::string_view provenance_name(Provenance p) noexcept;

/// A composite prompt: system role, ordered segments and the reasoning
/// strategy attached to it.
struct PromptArtifact {
  std::string system_role;
  std::vector<ContentItem> segments;
  ReasoningStrategy strategy;
  Provenance provenance = Provenance::UserTask;

  /// Concatenation of the text segments, separated by blank lines.
  std::string text() const;

  friend bool operator==(const PromptArtifact&, const PromptArtifact&) = default;
};

// ---------------------------------------------------------------------------
// Units and configuration

enum class UnitRole { RoleWriter, Reasoner, Planner, Optimizer, Critic, Refiner, Actor };

inline constexpr UnitRole kAllRoles[] = {UnitRole::RoleWriter, UnitRole::Reasoner, UnitRole::Planner,
                                         UnitRole::Optimizer,  UnitRole::Critic,   UnitRole::Refiner,
                                         UnitRole::Actor};

std::string_view role_name(UnitRole role) noexcept;
std::optional<UnitRole> role_from_name(std::string_view name) noexcept;

enum class ProviderProfile { Deterministic, Creative };

struct SamplingConfig {
  double temperature = 0.0;
  double top_p = 0.99;

  /// Deterministic profile: temperature 0. Creative profile: 0.7. Both use top_p 0.99.
  static SamplingConfig for_profile(ProviderProfile profile) noexcept;
  bool valid() const noexcept;

  friend bool operator==(const SamplingConfig&, const SamplingConfig&) = default;
};

enum class Backend { Mock, HttpChat };

struct MockEntry {
  std::optional<std::string> match;  // substring the request must contain
  std::string response;

  friend bool operator==(const MockEntry&, const MockEntry&) = default;
};

struct EmbeddingOverride {
  std::string match;  // substring of the embedded text
  std::vector<double> vector;

  friend bool operator==(const EmbeddingOverride&, const EmbeddingOverride&) = default;
};

/// Settings for the scripted mock backend.
struct MockSettings {
  std::vector<MockEntry> script;
  std::map<std::string, std::vector<MockEntry>> scripts_by_task;  // keyed by task id
  int embedding_dim = 64;
  std::vector<EmbeddingOverride> embedding_overrides;
  std::uint64_t seed = 0;

  friend bool operator==(const MockSettings&, const MockSettings&) = default;
};

struct ProviderConfig {
  Backend backend = Backend::Mock;
  std::string model_name;
  std::string endpoint;     // HttpChat chat-completion URL
  std::string api_key_env;  // HttpChat: name of the env var holding the key
  std::string embedding_endpoint;
  std::string embedding_model;
  ProviderProfile profile = ProviderProfile::Deterministic;
  SamplingConfig sampling = SamplingConfig::for_profile(ProviderProfile::Deterministic);
  bool supports_images = false;
  int timeout_seconds = 60;
  MockSettings mock;

  friend bool operator==(const ProviderConfig&, const ProviderConfig&) = default;
};

ValidationReport validate_provider_config(const ProviderConfig& config);

inline constexpr std::string_view kDefaultTextLoss =
    "critical evaluation instructions and analysis of the reflected input along with the initial "
    "questions";
inline constexpr std::string_view kDefaultEarlyStopMarker = "NO_FURTHER_IMPROVEMENT";
inline constexpr double kDefaultTheta = 0.1;

struct EngineConfig {
  double theta = kDefaultTheta;  // JSD gate threshold, base-2 JSD in [0,1]
  int trials = 2;                // initial attempt + one refinement trial
  int tgd_iterations = 1;
  std::map<UnitRole, ProviderConfig> role_bindings;
  std::optional<ProviderConfig> embedder;  // falls back to the critic binding
  std::optional<std::string> step_directive;
  ReasoningStrategy plan_strategy = ReasoningStrategy::cot_and_reflection();
  ReasoningStrategy act_strategy = ReasoningStrategy::cot_and_reflection();
  std::string loss_instruction{kDefaultTextLoss};
  std::string early_stop_marker{kDefaultEarlyStopMarker};
  std::optional<std::string> tool_store;  // path to a tool-store file
  std::optional<std::string> taxonomy;    // path to a category taxonomy file

  const ProviderConfig& binding(UnitRole role) const;
  const ProviderConfig& embedder_binding() const;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

ValidationReport validate_engine_config(const EngineConfig& config);

/// Model-name collisions between the role writer and any other unit.
std::vector<UnitRole> role_writer_collisions(const EngineConfig& config);

}  // namespace musa
