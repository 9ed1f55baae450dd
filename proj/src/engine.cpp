// SPDX-License-Identifier: Apache-2.0
#include "musa/engine.hpp"

#include <cstdio>

#include "musa/optimizer.hpp"
#include "musa/planner.hpp"
#include "musa/reasoner.hpp"

namespace musa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

constexpr std::string_view kWriterRole = "You write system role descriptions for language-model assistants.";

std::optional<Plan> try_parse(const std::string& text, const Task& task) {
  try {
    Plan p = parse_plan(text, task.permitted_ids());
    for (auto& a : p.actions) a.inputs = task.inputs;
    return p;
  } catch (const PlanParseError&) {
    return std::nullopt;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

UnitSet UnitSet::from_config(const EngineConfig& config, std::string_view task_id) {
  UnitSet units;
  for (auto role : kAllRoles) units.providers[role] = make_provider(config.binding(role), task_id);
  units.embedder = make_provider(config.embedder_binding(), task_id);
  return units;
}

Provider& UnitSet::provider(UnitRole role) const {
  auto it = providers.find(role);
  if (it == providers.end() || !it->second) throw ConfigError("no provider for role " + std::string(role_name(role)));
  return *it->second;
}

EnvironmentContext default_environment() {
  return EnvironmentContext{"Social media content analysis over posts, articles and their images.", {}};
}

RoleDescription bootstrap_role(const Task& task, const EnvironmentContext& env, const EngineConfig& config,
                               const UnitChannel& writer) {
  if (auto hits = role_writer_collisions(config); !hits.empty())
    throw BindingCollisionError("binding-collision: RoleWriter shares model with " +
                                std::string(role_name(hits.front())));
  PromptArtifact prompt;
  prompt.system_role = std::string(kWriterRole);
  std::string body =
      "Write a system role description, one short paragraph in the second person, for an assistant that "
      "analyses social media content and has to accomplish the following task.\nTask: " +
      task.goal;
  if (!env.description.empty()) body += "\nEnvironment: " + env.description;
  body += "\nReply with the role description only.";
  prompt.segments.push_back(ContentItem::make_text(std::move(body)));
  const std::string text = trim(writer.complete("bootstrap", writer.request_for(prompt)).text);
  if (text.empty()) throw Error("role writer returned an empty role description");
  return RoleDescription{text, writer.config().model_name};
}

PromptArtifact create_from_task(const Task& task, const EnvironmentContext& env, const ReasoningStrategy& strategy) {
  PromptArtifact p;
  if (!env.description.empty()) p.segments.push_back(ContentItem::make_text("Environment: " + env.description));
  p.segments.push_back(ContentItem::make_text("Task: " + task.goal));
  for (const auto& input : task.inputs) p.segments.push_back(input);
  p.strategy = strategy;
  p.provenance = Provenance::UserTask;
  return p;
}

PromptArtifact create_from_action(const Task& task, const ActionSpec& action, const ReasoningStrategy& strategy) {
  PromptArtifact p;
  p.segments.push_back(ContentItem::make_text("Task: " + task.goal));
  for (const auto& input : action.inputs) p.segments.push_back(input);
  p.segments.push_back(ContentItem::make_text("Planned action: " + std::string(action_name(action.kind)) + ". " +
                                              action.instructions));
  p.strategy = strategy;
  p.provenance = Provenance::PlannerOutput;
  return p;
}

// ---------------------------------------------------------------------------

struct Engine::Run {
  Transcript transcript;
  std::map<UnitRole, UnitChannel> channels;
  std::optional<UnitChannel> encoder;
  TaskResponse response;

  const UnitChannel& ch(UnitRole role) const { return channels.at(role); }
};

Engine::Engine(EngineConfig config, EngineOptions options) : config_(std::move(config)), options_(std::move(options)) {
  const auto report = validate_engine_config(config_);
  if (!report.ok()) {
    std::string msg = "invalid engine config:";
    for (const auto& p : report.problems) msg += "\n  " + p;
    if (report.mentions("binding-collision")) throw BindingCollisionError(msg);
    throw ConfigError(msg);
  }
  try {
    if (config_.tool_store) tools_ = ToolStore::load(*config_.tool_store);
    if (config_.taxonomy) taxonomy_ = CategoryTaxonomy::load(*config_.taxonomy);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

TaskResponse Engine::solve(const Task& task, const EnvironmentContext& env, const UnitSet& units) const {
  return run(task, env, units, true);
}

TaskResponse Engine::solve(const Task& task, const EnvironmentContext& env) const {
  return run(task, env, UnitSet::from_config(config_, task.id), true);
}

TaskResponse Engine::plan_only(const Task& task, const EnvironmentContext& env, const UnitSet& units) const {
  return run(task, env, units, false);
}

TaskResponse Engine::run(const Task& task, const EnvironmentContext& env, const UnitSet& units, bool execute) const {
  if (const auto report = validate_task(task); !report.ok())
    throw PreconditionError("invalid task: " + report.problems.front());

  Run run{options_.logical_clock ? Transcript(Transcript::logical_clock()) : Transcript(), {}, std::nullopt, {}};
  for (auto role : kAllRoles)
    run.channels.emplace(role, UnitChannel(units.provider(role), role, &run.transcript, options_.retry));
  if (!units.embedder) throw ConfigError("no embedder provider");
  run.encoder.emplace(*units.embedder, UnitRole::Critic, &run.transcript, options_.retry);
  run.response.task_id = task.id;

  auto fail = [&](const std::string& what) -> SolveError {
    run.response.transcript = run.transcript;
    return SolveError(what, run.response);
  };

  try {
    run.response.role = bootstrap_role(task, env, config_, run.ch(UnitRole::RoleWriter));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw fail(std::string("bootstrap: ") + e.what());
  }
  for (auto& [role, channel] : run.channels) {
    if (role != UnitRole::RoleWriter) channel.install_system_role(run.response.role.text);
  }
  run.encoder->install_system_role(run.response.role.text);

  PlanningOutcome outcome;
  try {
    outcome = trials(run, task, env);
  } catch (const Error& e) {
    throw fail(std::string("planning: ") + e.what());
  }
  run.response.plan_used = outcome.selected;

  if (execute) {
    try {
      execute_actions(run, task, outcome.selected);
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  run.response.transcript = run.transcript;
  return run.response;
}

PlanningOutcome Engine::trials(Run& run, const Task& task, const EnvironmentContext& env) const {
  PlanningOutcome outcome;
  std::optional<RefinedInstructions> refined;
  const TGDConfig tgd{config_.tgd_iterations, config_.step_directive, config_.early_stop_marker};
  const TextLoss loss{config_.loss_instruction, {task.goal}};

  for (int t = 0; t < config_.trials; ++t) {
    const bool last = t == config_.trials - 1;
    run.response.trials_executed = t + 1;
    TrialRecord rec;
    rec.trial = t;

    const PromptArtifact reasoned =
        reason(create_from_task(task, env, config_.plan_strategy), config_.plan_strategy, run.ch(UnitRole::Reasoner));
    rec.plan_a = refined ? replan(env, task, reasoned, *refined, run.ch(UnitRole::Planner))
                         : plan(env, task, reasoned, run.ch(UnitRole::Planner));
    if (refined) run.transcript.record_decision("replan", "replanned from refined instructions " + refined->derived_from);

    const Variable initial{render_plan(rec.plan_a), "a plan: the ordered actions, with instructions, for the task", {},
                           false};
    const Variable optimized = optimize(initial, reasoned, loss, tgd, run.ch(UnitRole::Optimizer));
    rec.optimized = optimized.value;
    rec.plan_b = try_parse(optimized.value, task);

    if (last) {
      if (rec.plan_b) {
        outcome.selected = *rec.plan_b;
        run.transcript.record_decision("plan-choice", "final trial: executing optimized plan");
      } else {
        outcome.selected = rec.plan_a;
        run.transcript.record_decision("plan-choice", "optimized plan does not parse: executing planner plan");
      }
      run.response.trials.push_back(rec);
      run.response.plan_used = outcome.selected;
      break;
    }

    if (!rec.plan_b) {
      outcome.selected = rec.plan_a;
      run.transcript.record_decision("plan-choice", "optimized plan does not parse: executing planner plan");
      run.response.trials.push_back(rec);
      break;
    }

    rec.gate = should_criticize(render_plan(rec.plan_a), render_plan(*rec.plan_b), *run.encoder, config_.theta);
    const std::string jsd_text = "JSD " + fixed(rec.gate->divergence, 6);
    if (!rec.gate->activate) {
      run.transcript.record_decision("gate", jsd_text + " < theta " + fixed(config_.theta, 4) + ": pass");
      outcome.selected = *rec.plan_b;
      run.response.trials.push_back(rec);
      break;
    }
    run.transcript.record_decision("gate", jsd_text + " >= theta " + fixed(config_.theta, 4) + ": critic activated");

    rec.critique = criticize(env, task, rec.plan_a, *rec.plan_b, run.ch(UnitRole::Critic), rec.gate->divergence);
    if (!rec.critique->actionable) {
      outcome.selected = rec.critique->selected == Verdict::PlanA ? rec.plan_a : *rec.plan_b;
      run.transcript.record_decision("plan-choice", "critique not actionable: executing plan " +
                                                        std::string(verdict_name(rec.critique->selected)));
      run.response.trials.push_back(rec);
      break;
    }
    rec.refined = refine(env, task, *rec.critique, run.ch(UnitRole::Refiner));
    refined = rec.refined;
    run.response.trials.push_back(rec);
  }
  outcome.trials = run.response.trials;
  return outcome;
}

void Engine::execute_actions(Run& run, const Task& task, const Plan& plan) const {
  if (plan.actions.empty()) throw PreconditionError("plan has no actions");
  const ActorResources resources{&tools_, taxonomy_ ? &*taxonomy_ : nullptr};
  const TGDConfig tgd{config_.tgd_iterations, config_.step_directive, config_.early_stop_marker};

  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    const ActionSpec& action = plan.actions[i];
    try {
      const PromptArtifact reasoned =
          reason(create_from_action(task, action, config_.act_strategy), config_.act_strategy, run.ch(UnitRole::Reasoner));
      const ActionResult first = act(action, reasoned, resources, run.ch(UnitRole::Actor), "act");
      const TextLoss loss{config_.loss_instruction, {task.goal, action.instructions}};
      const Variable initial{first.answer,
                             "the response to action " + std::to_string(action.id()) + " (" +
                                 std::string(action_name(action.kind)) + ")",
                             {},
                             false};
      const Variable improved = optimize(initial, reasoned, loss, tgd, run.ch(UnitRole::Optimizer));
      run.response.results.push_back(
          act(action, reasoned, resources, run.ch(UnitRole::Actor), "revise", improved.value));
    } catch (const Error& e) {
      throw Error("action " + std::to_string(i + 1) + " of " + std::to_string(plan.actions.size()) + " (" +
                  std::string(action_name(action.kind)) + "): " + e.what());
    }
  }
}

// ---------------------------------------------------------------------------

Json to_report_json(const ActionResult& result) {
  Json j{{"action_id", result.action_id}, {"answer", result.answer}, {"provider_calls", result.provider_calls}};
  if (const auto* t = std::get_if<TitlePayload>(&result.structured)) j["title"] = t->title;
  if (const auto* c = std::get_if<CategoryPayload>(&result.structured)) {
    j["category"] = Json{{"level1", c->level1}};
    if (c->level2) j["category"]["level2"] = *c->level2;
  }
  return j;
}

Json to_report_json(const TrialRecord& trial) {
  Json j{{"trial", trial.trial}, {"plan_a", render_plan(trial.plan_a)}, {"optimized", trial.optimized}};
  j["plan_b_parsed"] = trial.plan_b.has_value();
  if (trial.gate) j["gate"] = Json{{"divergence", trial.gate->divergence}, {"activate", trial.gate->activate}};
  if (trial.critique) {
    j["critique"] = Json{{"verdict", std::string(verdict_name(trial.critique->selected))},
                         {"feedback", trial.critique->feedback},
                         {"actionable", trial.critique->actionable},
                         {"digest", trial.critique->digest()}};
  }
  if (trial.refined)
    j["refined"] = Json{{"instructions", trial.refined->instructions}, {"derived_from", trial.refined->derived_from}};
  return j;
}

Json run_report(const TaskResponse& response, const std::optional<std::string>& error) {
  Json j;
  j["task_id"] = response.task_id;
  j["status"] = error ? "failed" : "ok";
  if (error) j["error"] = *error;
  j["role"] = Json{{"text", response.role.text}, {"generated_by", response.role.generated_by}};
  j["plan"] = response.plan_used.actions.empty() ? Json(nullptr) : Json(response.plan_used);
  j["trials_executed"] = response.trials_executed;
  Json trials = Json::array();
  for (const auto& t : response.trials) trials.push_back(to_report_json(t));
  j["trials"] = trials;
  Json results = Json::array();
  for (const auto& r : response.results) results.push_back(to_report_json(r));
  j["results"] = results;
  j["transcript"] = Json(response.transcript);
  const auto& ev = response.transcript.events();
  j["timing"] = Json{{"events", ev.size()},
                     {"elapsed_us", ev.empty() ? 0 : ev.back().timestamp_us - ev.front().timestamp_us}};
  return j;
}

}  // namespace musa
