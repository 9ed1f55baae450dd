// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "musa/engine.hpp"
#include "musa/fixtures.hpp"
#include "musa/planner.hpp"
#include "musa/serialize.hpp"
#include "support.hpp"

namespace musa {
namespace {

using testing::concat;
using testing::opt_cycle;
using testing::plan_text;

using Labels = std::vector<std::string>;

// Engine loop building blocks, written out by hand.
const Labels kReason = {"Reasoner:reason.trace", "Reasoner:reason.reflect"};
const Labels kOptimize = {"Optimizer:forward", "Optimizer:loss", "Optimizer:gradient", "Optimizer:step"};
const Labels kEncode = {"Critic:encode", "Critic:encode"};

Labels join(std::initializer_list<Labels> parts) {
  Labels out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Labels action_block() { return join({kReason, {"Actor:act"}, kOptimize, {"Actor:revise"}}); }

Labels reference_gate_pass() {
  return join({{"RoleWriter:bootstrap"}, kReason, {"Planner:plan"}, kOptimize, kEncode, {"decision:gate"},
               action_block()});
}

Labels reference_gate_fire() {
  return join({{"RoleWriter:bootstrap"}, kReason, {"Planner:plan"}, kOptimize, kEncode, {"decision:gate"},
               {"Critic:criticize", "Refiner:refine"}, kReason, {"Planner:replan", "decision:replan"}, kOptimize,
               {"decision:plan-choice"}, action_block()});
}

Labels reference_single_trial() {
  return join({{"RoleWriter:bootstrap"}, kReason, {"Planner:plan"}, kOptimize, {"decision:plan-choice"},
               action_block()});
}

const std::string kRole = "You are a public-health content analyst";

Task sample_task() {
  Task t;
  t.id = "t1";
  t.goal = "Check the post for health misinformation";
  t.inputs = {ContentItem::make_text("Post: herbal tea cures flu")};
  return t;
}

std::string qa_plan() { return plan_text({{1, "Answer whether the post is misinformation"}}); }
std::string title_plan() { return plan_text({{3, "Write a headline"}}); }

// Embeddings that pull a QA plan and a TitleGeneration plan far apart.
void force_divergence(EngineConfig& config) {
  auto& mock = config.role_bindings[UnitRole::Critic].mock;
  mock.embedding_dim = 2;
  mock.embedding_overrides = {EmbeddingOverride{"\"QA\"", {4, 0}}, EmbeddingOverride{"TitleGeneration", {0, 4}}};
}

Labels run_labels(const EngineConfig& config, const Task& task = sample_task()) {
  Engine engine(config, EngineOptions{true, {}});
  return engine.solve(task, default_environment()).transcript.labels();
}

MockProvider& mock(const UnitSet& units, UnitRole role) { return dynamic_cast<MockProvider&>(units.provider(role)); }

// ---------------------------------------------------------------------------

TEST(Scenarios, GatePass) {
  auto config = testing::engine_config(
      {{UnitRole::RoleWriter, {kRole}},
       {UnitRole::Reasoner, {"t", "r", "t", "r"}},
       {UnitRole::Planner, {qa_plan()}},
       {UnitRole::Optimizer, concat({opt_cycle(qa_plan()), opt_cycle("better")})},
       {UnitRole::Actor, {"ANSWER: yes", "ANSWER: yes"}}},
      2, ReasoningStrategy::cot_and_reflection());
  EXPECT_EQ(run_labels(config), reference_gate_pass());
}

TEST(Scenarios, GateFire) {
  auto config = testing::engine_config(
      {{UnitRole::RoleWriter, {kRole}},
       {UnitRole::Reasoner, {"t", "r", "t", "r", "t", "r"}},
       {UnitRole::Planner, {qa_plan(), qa_plan()}},
       {UnitRole::Optimizer, concat({opt_cycle(title_plan()), opt_cycle(qa_plan()), opt_cycle("better")})},
       {UnitRole::Critic, {"VERDICT: A\nFEEDBACK: keep the QA action"}},
       {UnitRole::Refiner, {"Plan a single QA action."}},
       {UnitRole::Actor, {"ANSWER: yes", "ANSWER: yes"}}},
      2, ReasoningStrategy::cot_and_reflection());
  force_divergence(config);
  EXPECT_EQ(run_labels(config), reference_gate_fire());
}

TEST(Scenarios, SingleTrialNeverEvaluatesGate) {
  auto config = testing::engine_config(
      {{UnitRole::RoleWriter, {kRole}},
       {UnitRole::Reasoner, {"t", "r", "t", "r"}},
       {UnitRole::Planner, {qa_plan()}},
       {UnitRole::Optimizer, concat({opt_cycle(title_plan()), opt_cycle("better")})},
       {UnitRole::Actor, {"yes", "yes"}}},
      1, ReasoningStrategy::cot_and_reflection());
  force_divergence(config);
  Engine engine(config, EngineOptions{true, {}});
  const auto r = engine.solve(sample_task(), default_environment());
  EXPECT_EQ(r.transcript.labels(), reference_single_trial());
  EXPECT_EQ(r.plan_used.actions[0].kind, ActionKind::TitleGeneration);
  EXPECT_FALSE(r.trials[0].gate);
}

TEST(Scenarios, CommittedReferencesFollowEngineLoop) {
  const std::pair<const char*, Labels> cases[] = {{"scenarios/gate_pass.transcript", reference_gate_pass()},
                                                  {"scenarios/gate_fire.transcript", reference_gate_fire()},
                                                  {"scenarios/single_trial.transcript", reference_single_trial()}};
  for (const auto& [file, expected] : cases) {
    std::string joined;
    for (const auto& l : expected) joined += l + "\n";
    EXPECT_EQ(read_text_file(testing::fixture(file)), joined) << file;
  }
}

TEST(Scenarios, CommittedScenariosReproduce) {
  for (const char* name : {"gate_pass", "gate_fire", "single_trial"}) {
    const std::string base = std::string("scenarios/") + name;
    const Json entry{{"name", name}, {"config", base + ".json"}, {"task", "tasks/example.task"},
                     {"reference", base + ".transcript"}};
    EXPECT_EQ(regenerate_scenario(testing::fixtures_dir(), entry), read_text_file(testing::fixture(base + ".transcript")))
        << name;
  }
}

// ---------------------------------------------------------------------------

TEST(Bootstrap, CollisionWithAnyUnitIsRejected) {
  for (auto role : kAllRoles) {
    if (role == UnitRole::RoleWriter) continue;
    auto config = testing::engine_config({});
    config.role_bindings[UnitRole::RoleWriter].model_name = config.role_bindings[role].model_name;
    EXPECT_THROW(Engine{config}, BindingCollisionError) << role_name(role);

    testing::ScriptedUnit writer(UnitRole::RoleWriter, {kRole});
    EXPECT_THROW(bootstrap_role(sample_task(), {}, config, writer.channel), BindingCollisionError);
    EXPECT_TRUE(writer.calls().empty());
  }
}

TEST(Bootstrap, OneCallCarryingGoalAndEnvironment) {
  auto config = testing::engine_config({});
  testing::ScriptedUnit writer(UnitRole::RoleWriter, {"  " + kRole + "\n"}, nullptr, false, "");
  const auto role = bootstrap_role(sample_task(), EnvironmentContext{"health posts", {}}, config, writer.channel);
  EXPECT_EQ(role.text, kRole);
  EXPECT_EQ(role.generated_by, "RoleWriter-model");
  ASSERT_EQ(writer.calls().size(), 1u);
  const std::string body = writer.calls()[0].request.flat_text();
  EXPECT_NE(body.find("Task: " + sample_task().goal), std::string::npos);
  EXPECT_NE(body.find("Environment: health posts"), std::string::npos);
}

TEST(Templates, CreateFromTaskAndAction) {
  const Task t = sample_task();
  const auto p = create_from_task(t, EnvironmentContext{"env", {}}, ReasoningStrategy::none());
  EXPECT_EQ(p.text(), "Environment: env\n\nTask: " + t.goal + "\n\nPost: herbal tea cures flu");
  const ActionSpec a{ActionKind::QA, "Answer yes or no", t.inputs};
  const auto q = create_from_action(t, a, ReasoningStrategy::none());
  EXPECT_EQ(q.text(), "Task: " + t.goal + "\n\nPost: herbal tea cures flu\n\nPlanned action: QA. Answer yes or no");
}

// Gate-pass config with a two-action plan.
EngineConfig two_action_config(std::vector<std::string> actor) {
  const std::string plan = plan_text({{1, "Answer it"}, {3, "Title it"}});
  return testing::engine_config({{UnitRole::RoleWriter, {kRole}},
                                 {UnitRole::Planner, {plan}},
                                 {UnitRole::Optimizer,
                                  concat({opt_cycle(plan), opt_cycle("improved answer text"), opt_cycle("better title")})},
                                 {UnitRole::Actor, std::move(actor)}},
                                2);
}

TEST(Solve, RoleTextOnEveryLaterRequest) {
  auto config = two_action_config({"ANSWER: a", "ANSWER: b", "TITLE: c", "TITLE: d"});
  Engine engine(config);
  const auto units = UnitSet::from_config(config);
  const auto r = engine.solve(sample_task(), default_environment(), units);
  EXPECT_EQ(r.role.text, kRole);
  std::size_t checked = 0;
  for (auto role : kAllRoles) {
    if (role == UnitRole::RoleWriter) continue;
    for (const auto& call : mock(units, role).script().recorded_calls()) {
      EXPECT_EQ(call.request.system_role, kRole) << role_name(role);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 1u + 12u + 4u);
  EXPECT_NE(mock(units, UnitRole::RoleWriter).script().recorded_calls()[0].request.system_role, kRole);
}

TEST(Solve, ResultsFollowPlanOrderAndReviseSeesOptimizerText) {
  auto config = two_action_config({"ANSWER: a", "ANSWER: b", "TITLE: c", "TITLE: d"});
  Engine engine(config);
  const auto units = UnitSet::from_config(config);
  const auto r = engine.solve(sample_task(), default_environment(), units);
  ASSERT_EQ(r.results.size(), 2u);
  EXPECT_EQ(r.results[0].action_id, 1);
  EXPECT_EQ(r.results[0].answer, "b");
  EXPECT_EQ(r.results[1].action_id, 3);
  EXPECT_EQ(r.results[1].answer, "d");
  const auto calls = mock(units, UnitRole::Actor).script().recorded_calls();
  EXPECT_NE(calls[1].request.flat_text().find("improved answer text"), std::string::npos);
  EXPECT_EQ(calls[0].request.flat_text().find("improved answer text"), std::string::npos);
  EXPECT_NE(calls[3].request.flat_text().find("better title"), std::string::npos);
}

TEST(Solve, ActionFailureReturnsPartialResults) {
  auto config = two_action_config({"ANSWER: a", "ANSWER: b", "TITLE: c"});
  Engine engine(config);
  try {
    engine.solve(sample_task(), default_environment());
    FAIL();
  } catch (const SolveError& e) {
    EXPECT_NE(std::string(e.what()).find("action 2 of 2 (TitleGeneration)"), std::string::npos);
    ASSERT_EQ(e.partial().results.size(), 1u);
    EXPECT_EQ(e.partial().results[0].answer, "b");
    EXPECT_EQ(e.partial().transcript.labels().back(), "Actor:revise");
    EXPECT_EQ(e.partial().transcript.events().back().status, CallStatus::Failed);
  }
}

TEST(Solve, PlanningFailureCarriesTranscript) {
  auto config = testing::engine_config({{UnitRole::RoleWriter, {kRole}}, {UnitRole::Planner, {"no structure"}}});
  Engine engine(config);
  try {
    engine.solve(sample_task(), default_environment());
    FAIL();
  } catch (const SolveError& e) {
    EXPECT_NE(std::string(e.what()).find("no plan block"), std::string::npos);
    EXPECT_EQ(e.partial().role.text, kRole);
    EXPECT_EQ(e.partial().transcript.call_labels(), (Labels{"RoleWriter:bootstrap", "Planner:plan"}));
  }
}

TEST(Solve, InvalidTaskIsAPrecondition) {
  Engine engine(testing::engine_config({}));
  Task t;
  EXPECT_THROW(engine.solve(t, {}), PreconditionError);
}

TEST(Solve, UnparseableOptimizedPlanFallsBackWithoutGate) {
  auto config = testing::engine_config({{UnitRole::RoleWriter, {kRole}},
                                        {UnitRole::Planner, {qa_plan()}},
                                        {UnitRole::Optimizer, concat({opt_cycle("a prose plan"), opt_cycle("x")})},
                                        {UnitRole::Actor, {"ANSWER: a", "ANSWER: b"}}},
                                       2);
  Engine engine(config, EngineOptions{true, {}});
  const auto r = engine.solve(sample_task(), default_environment());
  EXPECT_EQ(r.plan_used.actions[0].kind, ActionKind::QA);
  EXPECT_FALSE(r.trials[0].plan_b);
  const auto labels = r.transcript.labels();
  EXPECT_EQ(std::count(labels.begin(), labels.end(), "Critic:encode"), 0);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), "decision:plan-choice"), 1);
}

TEST(Solve, NonActionableCritiqueExecutesCriticsPick) {
  auto config = testing::engine_config({{UnitRole::RoleWriter, {kRole}},
                                        {UnitRole::Planner, {qa_plan()}},
                                        {UnitRole::Optimizer, concat({opt_cycle(title_plan()), opt_cycle("x")})},
                                        {UnitRole::Critic, {"VERDICT: A\nFEEDBACK:"}},
                                        {UnitRole::Actor, {"ANSWER: a", "ANSWER: b"}}},
                                       2);
  force_divergence(config);
  Engine engine(config, EngineOptions{true, {}});
  const auto r = engine.solve(sample_task(), default_environment());
  EXPECT_EQ(r.plan_used.actions[0].kind, ActionKind::QA);
  EXPECT_EQ(r.transcript.count_calls(UnitRole::Refiner), 0u);
  EXPECT_EQ(r.trials_executed, 1);
}

TEST(Solve, PlanOnlyExecutesNothing) {
  auto config = testing::engine_config({{UnitRole::RoleWriter, {kRole}},
                                        {UnitRole::Planner, {qa_plan()}},
                                        {UnitRole::Optimizer, opt_cycle(qa_plan())}});
  Engine engine(config);
  const auto r = engine.plan_only(sample_task(), default_environment(), UnitSet::from_config(config));
  EXPECT_TRUE(r.results.empty());
  EXPECT_EQ(r.transcript.count_calls(UnitRole::Actor), 0u);
  ASSERT_TRUE(r.trials[0].gate);
  EXPECT_EQ(r.trials[0].gate->divergence, 0.0);
}

TEST(Solve, ConfigRoundTripGivesIdenticalTranscript) {
  auto config = two_action_config({"ANSWER: a", "ANSWER: b", "TITLE: c", "TITLE: d"});
  const auto copy = deserialize<EngineConfig>(serialize(config));
  const auto a = Engine(config, EngineOptions{true, {}}).solve(sample_task(), default_environment());
  const auto b = Engine(copy, EngineOptions{true, {}}).solve(sample_task(), default_environment());
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(run_report(a).dump(), run_report(b).dump());
}

TEST(Solve, RunReportFields) {
  auto config = two_action_config({"ANSWER: a", "ANSWER: b", "TITLE: c", "TITLE: d"});
  const auto r = Engine(config, EngineOptions{true, {}}).solve(sample_task(), default_environment());
  const Json j = run_report(r);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["task_id"], "t1");
  EXPECT_EQ(j["trials_executed"], 1);
  EXPECT_EQ(j["results"][1]["title"], "d");
  EXPECT_EQ(j["trials"][0]["gate"]["activate"], false);
  EXPECT_EQ(j["timing"]["events"], r.transcript.size());
  EXPECT_EQ(run_report(r, std::string("boom"))["status"], "failed");
}

// Random trial counts and gate/critic outcomes; scripts are derived by
// simulating the loop, then the transcript is checked against the laws.
TEST(Solve, TrialBoundBreakAndRefinerLawsProperty) {
  std::mt19937 rng(17);
  for (int round = 0; round < 150; ++round) {
    const int trials = 1 + static_cast<int>(rng() % 4);
    std::vector<std::string> planner, optimizer, critic, refiner;
    int expected_critics = 0, expected_refines = 0;
    std::string executed;
    for (int t = 0; t < trials; ++t) {
      const bool fire = rng() % 2;
      const std::string plan_b = fire ? title_plan() : qa_plan();
      planner.push_back(qa_plan());
      optimizer = concat({optimizer, opt_cycle(plan_b)});
      if (t == trials - 1) {
        executed = plan_b;
        break;
      }
      if (!fire) {
        executed = plan_b;
        break;
      }
      ++expected_critics;
      const bool actionable = rng() % 2;
      critic.push_back(actionable ? "VERDICT: A\nFEEDBACK: use QA" : "VERDICT: B\nFEEDBACK:");
      if (!actionable) {
        executed = plan_b;
        break;
      }
      ++expected_refines;
      refiner.push_back("Use QA only.");
    }
    optimizer = concat({optimizer, opt_cycle("improved")});
    auto config = testing::engine_config({{UnitRole::RoleWriter, {kRole}},
                                          {UnitRole::Planner, planner},
                                          {UnitRole::Optimizer, optimizer},
                                          {UnitRole::Critic, critic},
                                          {UnitRole::Refiner, refiner},
                                          {UnitRole::Actor, {"ANSWER: a", "ANSWER: b"}}},
                                         trials);
    force_divergence(config);
    const auto r = Engine(config, EngineOptions{true, {}}).solve(sample_task(), default_environment());
    const auto labels = r.transcript.labels();
    const auto count = [&](const std::string& l) { return std::count(labels.begin(), labels.end(), l); };

    EXPECT_LE(count("Critic:criticize"), trials - 1);
    EXPECT_EQ(count("Critic:criticize"), expected_critics);
    EXPECT_EQ(count("Refiner:refine"), expected_refines);
    EXPECT_LE(r.trials_executed, trials);
    EXPECT_EQ(r.results.size(), r.plan_used.actions.size());
    EXPECT_EQ(render_plan(r.plan_used), render_plan(parse_plan(executed, {1, 2, 3, 4})));

    // No planner event after a passing gate; refine only right after an actionable critique.
    bool passed = false;
    for (std::size_t i = 0; i < r.transcript.size(); ++i) {
      const auto& ev = r.transcript.events()[i];
      if (ev.label() == "decision:gate" && ev.detail.find(": pass") != std::string::npos) passed = true;
      if (passed) EXPECT_EQ(ev.unit == UnitRole::Planner, false);
      if (ev.label() == "Refiner:refine") {
        ASSERT_GT(i, 0u);
        EXPECT_EQ(r.transcript.events()[i - 1].label(), "Critic:criticize");
      }
    }
    for (const auto& tr : r.trials)
      if (tr.refined) EXPECT_TRUE(tr.critique && tr.critique->actionable);
  }
}

}  // namespace
}  // namespace musa
