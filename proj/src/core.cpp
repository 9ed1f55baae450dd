// SPDX-License-Identifier: Apache-2.0
#include "musa/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "musa/error.hpp"

namespace musa {

ContentItem ContentItem::make_text(std::string text) {
  ContentItem item;
  item.kind = ContentKind::Text;
  item.text = std::move(text);
  return item;
}

ContentItem ContentItem::make_image(std::string location, std::string media_type) {
  ContentItem item;
  item.kind = ContentKind::ImageRef;
  item.image = ImageRef{std::move(location), std::move(media_type)};
  return item;
}

bool ContentItem::valid() const noexcept {
  if (kind == ContentKind::Text) return text.has_value() && !image.has_value();
  return image.has_value() && !text.has_value() && !image->location.empty() && !image->media_type.empty();
}

bool contains_images(const std::vector<ContentItem>& items) {
  return std::any_of(items.begin(), items.end(), [](const ContentItem& c) { return c.is_image(); });
}

// ---------------------------------------------------------------------------

std::optional<ActionKind> action_from_id(int id) noexcept {
  if (id < kMinActionId || id > kMaxActionId) return std::nullopt;
  return static_cast<ActionKind>(id);
}

std::optional<ActionKind> action_from_name(std::string_view name) noexcept {
  for (int id = kMinActionId; id <= kMaxActionId; ++id) {
    auto kind = static_cast<ActionKind>(id);
    if (action_name(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view action_name(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::QA: return "QA";
    case ActionKind::VQA: return "VQA";
    case ActionKind::TitleGeneration: return "TitleGeneration";
    case ActionKind::Categorization: return "Categorization";
  }
  return "?";
}

std::string_view action_description(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::QA: return "Answers natural language questions about textual content";
    case ActionKind::VQA: return "Answers natural language questions about text-rich content";
    case ActionKind::TitleGeneration: return "Creates a short headline from the input";
    case ActionKind::Categorization:
      return "Classifies and organizes online content into categories. It can also be used for "
             "sub-categories";
  }
  return "";
}

// ---------------------------------------------------------------------------

std::vector<int> Task::permitted_ids() const {
  if (!allowed_actions) return {1, 2, 3, 4};
  return {allowed_actions->begin(), allowed_actions->end()};
}

bool ValidationReport::mentions(std::string_view needle) const {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

ValidationReport validate_task(const Task& task) {
  ValidationReport report;
  if (task.goal.find_first_not_of(" \t\r\n") == std::string::npos) report.problems.push_back("empty goal");
  if (task.allowed_actions) {
    if (task.allowed_actions->empty()) report.problems.push_back("allowed_actions is empty");
    for (int id : *task.allowed_actions) {
      if (!action_from_id(id)) report.problems.push_back("unknown action id " + std::to_string(id));
    }
  }
  for (std::size_t i = 0; i < task.inputs.size(); ++i) {
    if (!task.inputs[i].valid()) report.problems.push_back("input " + std::to_string(i) + " is malformed");
  }
  return report;
}

ValidationReport validate_plan(const Plan& plan) {
  ValidationReport report;
  if (plan.actions.empty()) report.problems.push_back("plan has no actions");
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    const auto& a = plan.actions[i];
    if (!action_from_id(a.id())) report.problems.push_back("action " + std::to_string(i) + ": unknown action id");
    if (a.instructions.find_first_not_of(" \t\r\n") == std::string::npos)
      report.problems.push_back("action " + std::to_string(i) + ": empty instructions");
  }
  return report;
}

// ---------------------------------------------------------------------------

bool ReasoningStrategy::valid() const noexcept {
  if (kind == StrategyKind::FewShot) return !examples.empty();
  return examples.empty();
}

std::string_view strategy_name(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::None: return "none";
    case StrategyKind::FewShot: return "fewshot";
    case StrategyKind::ZeroShotCoT: return "cot";
    case StrategyKind::SelfReflection: return "reflection";
    case StrategyKind::CoTAndReflection: return "car";
  }
  return "?";
}

std::optional<StrategyKind> strategy_from_name(std::string_view name) noexcept {
  for (auto k : {StrategyKind::None, StrategyKind::FewShot, StrategyKind::ZeroShotCoT, StrategyKind::SelfReflection,
                 StrategyKind::CoTAndReflection}) {
    if (strategy_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view provenance_name(Provenance p) noexcept {
  switch (p) {
    case Provenance::UserTask: return "UserTask";
    case Provenance::PlannerOutput: return "PlannerOutput";
    case Provenance::OptimizerFeedback: return "OptimizerFeedback";
    case Provenance::CriticFeedback: return "CriticFeedback";
    case Provenance::RefinerOutput: return "RefinerOutput";
  }
  return "?";
}

std::string PromptArtifact::text() const {
  std::string out;
  for (const auto& seg : segments) {
    if (!seg.is_text()) continue;
    if (!out.empty()) out += "\n\n";
    out += *seg.text;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view role_name(UnitRole role) noexcept {
  switch (role) {
    case UnitRole::RoleWriter: return "RoleWriter";
    case UnitRole::Reasoner: return "Reasoner";
    case UnitRole::Planner: return "Planner";
    case UnitRole::Optimizer: return "Optimizer";
    case UnitRole::Critic: return "Critic";
    case UnitRole::Refiner: return "Refiner";
    case UnitRole::Actor: return "Actor";
  }
  return "?";
}

std::optional<UnitRole> role_from_name(std::string_view name) noexcept {
  for (auto r : kAllRoles) {
    if (role_name(r) == name) return r;
  }
  return std::nullopt;
}

SamplingConfig SamplingConfig::for_profile(ProviderProfile profile) noexcept {
  return profile == ProviderProfile::Creative ? SamplingConfig{0.7, 0.99} : SamplingConfig{0.0, 0.99};
}

bool SamplingConfig::valid() const noexcept {
  return std::isfinite(temperature) && temperature >= 0.0 && std::isfinite(top_p) && top_p > 0.0 && top_p <= 1.0;
}

ValidationReport validate_provider_config(const ProviderConfig& config) {
  ValidationReport report;
  if (config.model_name.empty()) report.problems.push_back("model_name is empty");
  if (!config.sampling.valid()) report.problems.push_back("sampling out of range (temperature >= 0, top_p in (0,1])");
  if (config.backend == Backend::HttpChat) {
    if (config.endpoint.empty()) report.problems.push_back("HttpChat requires endpoint");
    if (config.api_key_env.empty()) report.problems.push_back("HttpChat requires api_key_env");
  }
  if (config.backend == Backend::Mock) {
    if (config.mock.embedding_dim < 2) report.problems.push_back("mock embedding_dim must be >= 2");
    for (const auto& o : config.mock.embedding_overrides) {
      if (static_cast<int>(o.vector.size()) != config.mock.embedding_dim)
        report.problems.push_back("embedding override '" + o.match + "' has wrong dimension");
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

const ProviderConfig& EngineConfig::binding(UnitRole role) const {
  auto it = role_bindings.find(role);
  if (it == role_bindings.end()) throw ConfigError("no provider bound to role " + std::string(role_name(role)));
  return it->second;
}

const ProviderConfig& EngineConfig::embedder_binding() const {
  return embedder ? *embedder : binding(UnitRole::Critic);
}

std::vector<UnitRole> role_writer_collisions(const EngineConfig& config) {
  std::vector<UnitRole> hits;
  auto writer = config.role_bindings.find(UnitRole::RoleWriter);
  if (writer == config.role_bindings.end()) return hits;
  for (const auto& [role, binding] : config.role_bindings) {
    if (role != UnitRole::RoleWriter && binding.model_name == writer->second.model_name) hits.push_back(role);
  }
  return hits;
}

ValidationReport validate_engine_config(const EngineConfig& config) {
  ValidationReport report;
  if (!(config.theta >= 0.0 && config.theta <= 1.0)) report.problems.push_back("theta must be in [0,1]");
  if (config.trials < 1) report.problems.push_back("trials must be >= 1");
  if (config.tgd_iterations < 1) report.problems.push_back("tgd_iterations must be >= 1");
  if (!config.plan_strategy.valid()) report.problems.push_back("plan_strategy: fewshot needs at least one example");
  if (!config.act_strategy.valid()) report.problems.push_back("act_strategy: fewshot needs at least one example");
  if (config.early_stop_marker.empty()) report.problems.push_back("early_stop_marker is empty");
  if (config.loss_instruction.empty()) report.problems.push_back("loss_instruction is empty");
  for (auto role : kAllRoles) {
    auto it = config.role_bindings.find(role);
    if (it == config.role_bindings.end()) {
      report.problems.push_back("role " + std::string(role_name(role)) + " is not bound");
      continue;
    }
    for (const auto& p : validate_provider_config(it->second).problems)
      report.problems.push_back(std::string(role_name(role)) + ": " + p);
  }
  if (config.embedder) {
    for (const auto& p : validate_provider_config(*config.embedder).problems) report.problems.push_back("embedder: " + p);
  }
  for (auto role : role_writer_collisions(config)) {
    report.problems.push_back("binding-collision: RoleWriter shares model with " + std::string(role_name(role)));
  }
  return report;
}

}  // namespace musa
