// SPDX-License-Identifier: Apache-2.0
#include "musa/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <sstream>

#include "musa/engine.hpp"
#include "musa/eval.hpp"
#include "musa/fixtures.hpp"
#include "musa/planner.hpp"
#include "musa/serialize.hpp"

namespace musa {
namespace {

struct Overrides {
  std::optional<double> theta;
  std::optional<int> trials;
  std::optional<std::string> strategy;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
};

struct Common {
  std::string config;
  std::string out;
  bool logical_clock = false;
  Overrides overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Engine config file")->required();
  cmd->add_option("--theta", c.overrides.theta, "Critic gate threshold in [0,1]");
  cmd->add_option("--trials", c.overrides.trials, "Planning trials (>= 1)");
  cmd->add_option("--strategy", c.overrides.strategy, "Reasoning strategy: none, cot, car, fewshot");
  cmd->add_option("--iterations", c.overrides.iterations, "Optimizer iterations (>= 1)");
  cmd->add_option("--seed", c.overrides.seed, "Seed for mock embeddings");
  cmd->add_option("--out", c.out, "Write the report to this file instead of stdout");
  cmd->add_flag("--logical-clock", c.logical_clock, "Timestamps count events (byte-stable reports)");
}

void set_seed(ProviderConfig& p, std::uint64_t seed) { p.mock.seed = seed; }

EngineConfig effective_config(const Common& c) {
  EngineConfig config = load_engine_config(c.config);
  const Overrides& o = c.overrides;
  if (o.theta) config.theta = *o.theta;
  if (o.trials) config.trials = *o.trials;
  if (o.iterations) config.tgd_iterations = *o.iterations;
  if (o.strategy) {
    const std::string name = *o.strategy;
    std::optional<StrategyKind> kind;
    if (name == "none" || name == "cot" || name == "car" || name == "fewshot") kind = strategy_from_name(name);
    if (!kind) throw ConfigError("unknown strategy '" + name + "'; valid strategies: none, cot, car, fewshot");
    for (ReasoningStrategy* s : {&config.plan_strategy, &config.act_strategy}) {
      if (*kind == StrategyKind::FewShot && s->examples.empty())
        throw ConfigError("strategy fewshot needs examples in the config file");
      s->kind = *kind;
      if (*kind != StrategyKind::FewShot) s->examples.clear();
    }
  }
  if (o.seed) {
    for (auto& [role, binding] : config.role_bindings) set_seed(binding, *o.seed);
    if (config.embedder) set_seed(*config.embedder, *o.seed);
  }
  if (const auto report = validate_engine_config(config); !report.ok()) {
    std::string msg = c.config + ": invalid engine config";
    for (const auto& p : report.problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return config;
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_text_file(c.out, text);
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

TaskFile task_from_flags(const std::string& task_path, const std::string& goal) {
  if (!task_path.empty() && !goal.empty()) throw ConfigError("give either --task or --goal, not both");
  if (!task_path.empty()) return load_task_file(task_path);
  if (goal.empty()) throw ConfigError("a task is required: --task <file> or --goal <text>");
  TaskFile f;
  f.task.id = "cli";
  f.task.goal = goal;
  f.environment = default_environment();
  return f;
}

int cmd_solve(const Common& c, const std::string& task_path, const std::string& goal, std::ostream& out,
              std::ostream& err) {
  const EngineConfig config = effective_config(c);
  const TaskFile file = task_from_flags(task_path, goal);
  const Engine engine(config, EngineOptions{c.logical_clock, {}});
  try {
    const TaskResponse response = engine.solve(file.task, file.environment);
    emit(c, canonical_dump(run_report(response)), out);
    return kExitOk;
  } catch (const SolveError& e) {
    emit(c, canonical_dump(run_report(e.partial(), std::string(e.what()))), out);
    err << "task failed: " << e.what() << "\n";
    return kExitTaskFailure;
  }
}

int cmd_plan(const Common& c, const std::string& task_path, const std::string& goal, std::ostream& out,
             std::ostream& err) {
  const EngineConfig config = effective_config(c);
  const TaskFile file = task_from_flags(task_path, goal);
  const Engine engine(config, EngineOptions{c.logical_clock, {}});
  TaskResponse response;
  int code = kExitOk;
  try {
    response = engine.plan_only(file.task, file.environment, UnitSet::from_config(config, file.task.id));
  } catch (const SolveError& e) {
    response = e.partial();
    err << "task failed: " << e.what() << "\n";
    code = kExitTaskFailure;
  }
  std::ostringstream text;
  const std::string theta = fixed(config.theta, 4);
  for (const auto& t : response.trials) {
    text << "trial " << t.trial << "\n";
    text << "plan A (planner):\n" << render_plan(t.plan_a) << "\n";
    text << "plan B (optimizer):\n" << (t.plan_b ? render_plan(*t.plan_b) : t.optimized + "\n(does not parse)") << "\n";
    if (!t.gate) {
      text << "gate: not evaluated\n";
    } else if (!t.gate->activate) {
      text << "gate: pass (JSD " << fixed(t.gate->divergence, 4) << " < θ=" << theta << ")\n";
    } else {
      text << "gate: critic activated (JSD " << fixed(t.gate->divergence, 4) << " >= θ=" << theta << ")\n";
    }
    if (t.critique) {
      text << "critique: verdict " << verdict_name(t.critique->selected) << "\n";
      text << "feedback: " << (t.critique->feedback.empty() ? "(none)" : t.critique->feedback) << "\n";
    }
    if (t.refined) text << "refined instructions: " << t.refined->instructions << "\n";
    text << "\n";
  }
  if (code == kExitOk) text << "selected plan:\n" << render_plan(response.plan_used) << "\n";
  emit(c, text.str(), out);
  return code;
}

int cmd_eval(const Common& c, const std::string& dataset, const std::string& format_name, const std::string& kind_name,
             int workers, const std::string& ids_path, bool json, std::ostream& out) {
  const auto kind = task_kind_from_name(kind_name);
  if (!kind) throw ConfigError("unknown task kind '" + kind_name + "'; valid kinds: " + std::string(kTaskKindNames));
  const auto format = dataset_format_from_name(format_name);
  if (!format) throw ConfigError("unknown dataset format '" + format_name + "'; valid formats: native, hotpotqa, wikiweb2m, mnds");
  if (workers < 1) throw ConfigError("--workers must be >= 1");
  const EngineConfig config = effective_config(c);
  auto records = load_dataset(dataset, *format);
  if (!ids_path.empty()) records = filter_records(records, load_id_list(ids_path));
  const Engine engine(config, EngineOptions{c.logical_clock, {}});
  const MetricReport report = run_eval(records, *kind, engine_solver(engine, default_environment()), EvalOptions{workers});
  const std::string canonical = canonical_dump(report_json(report));
  if (!c.out.empty()) write_text_file(c.out, canonical);
  out << (json ? canonical : format_table(report));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal social-content agent: solve tasks, inspect plans, run evaluations."};
  app.require_subcommand(1);

  Common solve_opts, plan_opts, eval_opts, config_opts;
  std::string task_path, goal, dataset, format = "native", kind, ids_path, fixture_root = "fixtures";
  int workers = 4;
  bool json = false;

  auto* solve = app.add_subcommand("solve", "Solve one task and write the run report");
  add_common(solve, solve_opts);
  solve->add_option("--task", task_path, "Task file");
  solve->add_option("--goal", goal, "Inline task goal");

  auto* plan = app.add_subcommand("plan", "Run the planning trials only and show plans, gate and critique");
  add_common(plan, plan_opts);
  plan->add_option("--task", task_path, "Task file");
  plan->add_option("--goal", goal, "Inline task goal");

  auto* eval = app.add_subcommand("eval", "Evaluate a dataset (Pass@1) and print the metric table");
  add_common(eval, eval_opts);
  eval->add_option("--dataset", dataset, "Dataset file")->required();
  eval->add_option("--format", format, "Dataset layout: native, hotpotqa, wikiweb2m, mnds");
  eval->add_option("--kind", kind, "Task kind: qa, vqa, title, categorize")->required();
  eval->add_option("--workers", workers, "Concurrent records (default 4)");
  eval->add_option("--ids", ids_path, "File listing the record ids to evaluate");
  eval->add_flag("--json", json, "Print the canonical report instead of the table");

  auto* config = app.add_subcommand("config", "Print the effective engine config after overrides");
  add_common(config, config_opts);

  auto* check = app.add_subcommand("check-fixtures", "Verify bundled fixtures and regenerate goldens");
  check->add_option("--root", fixture_root, "Fixture directory");
  bool update = false;
  check->add_flag("--update", update, "Rewrite goldens, references and hashes from the current build");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opts, task_path, goal, out, err);
    if (plan->parsed()) return cmd_plan(plan_opts, task_path, goal, out, err);
    if (eval->parsed()) return cmd_eval(eval_opts, dataset, format, kind, workers, ids_path, json, out);
    if (config->parsed()) {
      emit(config_opts, canonical_dump(Json(effective_config(config_opts))), out);
      return kExitOk;
    }
    if (check->parsed()) {
      const FixtureReport report = fixture_integrity_check(fixture_root, update);
      for (const auto& name : report.checked) {
        bool bad = false;
        for (const auto& p : report.problems) bad = bad || p.fixture == name;
        out << (bad ? "FAIL " : "ok   ") << name << "\n";
      }
      for (const auto& p : report.problems) err << p.fixture << ": " << p.problem << "\n";
      return report.ok() ? kExitOk : kExitConfig;
    }
  } catch (const SolveError& e) {
    err << "task failed: " << e.what() << "\n";
    return kExitTaskFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace musa
