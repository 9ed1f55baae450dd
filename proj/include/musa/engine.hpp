// SPDX-License-Identifier: Apache-2.0
//
// Task solving end to end.
//
//   bootstrap role (RoleWriter)
//   for trial in 0..trials-1:
//     reason(task prompt) -> plan / replan -> optimize(plan)
//     if trial < trials-1:
//       encode both plans, gate on JSD >= theta
//       gate closed            -> execute optimized plan
//       gate open              -> criticize; non-actionable critique executes the
//                                 critic's pick, otherwise refine and replan
//     else: execute optimized plan, or the planner's plan if it does not parse
//   for each action: reason -> act -> optimize(answer) -> act again with feedback
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "musa/actor.hpp"
#include "musa/core.hpp"
#include "musa/critic.hpp"
#include "musa/divergence.hpp"
#include "musa/error.hpp"
#include "musa/provider.hpp"
#include "musa/serialize.hpp"
#include "musa/transcript.hpp"

namespace musa {

struct RoleDescription {
  std::string text;
  std::string generated_by;  // model name of the role writer

  friend bool operator==(const RoleDescription&, const RoleDescription&) = default;
};

class BindingCollisionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// One provider per unit role plus the embedder used by the gate.
struct UnitSet {
  std::map<UnitRole, std::shared_ptr<Provider>> providers;
  std::shared_ptr<Provider> embedder;

  /// Fresh providers for one task run; mock scripts are selected by task id.
  static UnitSet from_config(const EngineConfig& config, std::string_view task_id = {});

  Provider& provider(UnitRole role) const;
};

struct TrialRecord {
  int trial = 0;
  Plan plan_a;                   // planner output
  std::string optimized;         // final value of the optimized plan text
  std::optional<Plan> plan_b;    // optimized plan, when it parses
  std::optional<GateDecision> gate;
  std::optional<Critique> critique;
  std::optional<RefinedInstructions> refined;
};

struct PlanningOutcome {
  Plan selected;
  std::vector<TrialRecord> trials;
};

struct TaskResponse {
  std::string task_id;
  RoleDescription role;
  std::vector<ActionResult> results;
  Plan plan_used;
  int trials_executed = 0;
  std::vector<TrialRecord> trials;
  Transcript transcript;
};

/// A unit failed. Carries everything produced before the failure.
class SolveError : public Error {
 public:
  SolveError(const std::string& what, TaskResponse partial) : Error(what), partial_(std::move(partial)) {}
  const TaskResponse& partial() const noexcept { return partial_; }

 private:
  TaskResponse partial_;
};

struct EngineOptions {
  bool logical_clock = false;  // event timestamps count events; keeps reports byte-stable
  RetryPolicy retry;
};

/// The closed environment used when a task file does not describe one.
EnvironmentContext default_environment();

/// Checks the collision rule and makes one RoleWriter call, operation "bootstrap".
RoleDescription bootstrap_role(const Task& task, const EnvironmentContext& env, const EngineConfig& config,
                               const UnitChannel& writer);

/// Deterministic prompt templating for the task and for one action.
PromptArtifact create_from_task(const Task& task, const EnvironmentContext& env, const ReasoningStrategy& strategy);
PromptArtifact create_from_action(const Task& task, const ActionSpec& action, const ReasoningStrategy& strategy);

class Engine {
 public:
  /// Validates the config and loads the tool store and taxonomy it names.
  explicit Engine(EngineConfig config, EngineOptions options = {});

  const EngineConfig& config() const noexcept { return config_; }
  const ToolStore& tools() const noexcept { return tools_; }
  const std::optional<CategoryTaxonomy>& taxonomy() const noexcept { return taxonomy_; }

  /// Full run. Throws PreconditionError for invalid tasks, ConfigError for
  /// binding problems and SolveError for unit failures.
  TaskResponse solve(const Task& task, const EnvironmentContext& env, const UnitSet& units) const;
  TaskResponse solve(const Task& task, const EnvironmentContext& env) const;

  /// Bootstrap and trials loop only; no action is executed.
  TaskResponse plan_only(const Task& task, const EnvironmentContext& env, const UnitSet& units) const;

 private:
  struct Run;
  TaskResponse run(const Task& task, const EnvironmentContext& env, const UnitSet& units, bool execute) const;
  PlanningOutcome trials(Run& run, const Task& task, const EnvironmentContext& env) const;
  void execute_actions(Run& run, const Task& task, const Plan& plan) const;

  EngineConfig config_;
  EngineOptions options_;
  ToolStore tools_;
  std::optional<CategoryTaxonomy> taxonomy_;
};

/// Run report in canonical form. `error` is set for failed runs.
Json run_report(const TaskResponse& response, const std::optional<std::string>& error = std::nullopt);
Json to_report_json(const ActionResult& result);
Json to_report_json(const TrialRecord& trial);

}  // namespace musa
