// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "musa/critic.hpp"
#include "musa/planner.hpp"
#include "support.hpp"

namespace musa {
namespace {

using testing::plan_text;
using testing::ScriptedUnit;
using testing::text_prompt;

const std::vector<int> kAll{1, 2, 3, 4};

std::string parse_error(std::string_view raw, const std::vector<int>& allowed = kAll) {
  try {
    parse_plan(raw, allowed);
  } catch (const PlanParseError& e) {
    EXPECT_EQ(e.raw(), raw);
    return e.what();
  }
  return "";
}

TEST(ParsePlan, MinimalBlock) {
  const auto p = parse_plan("thinking...\n" + plan_text({{1, "answer Q"}}, "r"), kAll);
  ASSERT_EQ(p.actions.size(), 1u);
  EXPECT_EQ(p.actions[0].kind, ActionKind::QA);
  EXPECT_EQ(p.actions[0].instructions, "answer Q");
  EXPECT_EQ(p.rationale, "r");
}

TEST(ParsePlan, FirstBlockWins) {
  const auto p = parse_plan(plan_text({{3, "title"}}) + "\n" + plan_text({{1, "qa"}}), kAll);
  ASSERT_EQ(p.actions.size(), 1u);
  EXPECT_EQ(p.actions[0].kind, ActionKind::TitleGeneration);
}

TEST(ParsePlan, SkipsBlocksWithOtherTags) {
  const std::string raw = "```python\nprint(1)\n```\n```json\n{\"actions\": [{\"id\": 2, \"instructions\": \"read\"}]}\n```";
  EXPECT_EQ(parse_plan(raw, kAll).actions[0].kind, ActionKind::VQA);
}

TEST(ParsePlan, DuplicateActionsAllowed) {
  EXPECT_EQ(parse_plan(plan_text({{1, "a"}, {1, "b"}}), kAll).actions.size(), 2u);
}

TEST(ParsePlan, Errors) {
  EXPECT_NE(parse_error("no structure here").find("no plan block"), std::string::npos);
  EXPECT_NE(parse_error("```plan\n{oops\n```").find("malformed plan block"), std::string::npos);
  EXPECT_NE(parse_error("```plan\n{\"actions\": []}\n```").find("empty actions"), std::string::npos);
  EXPECT_NE(parse_error(plan_text({{9, "x"}})).find("unknown action id 9"), std::string::npos);
  EXPECT_NE(parse_error(plan_text({{2, "x"}}), {1}).find("disallowed action 2"), std::string::npos);
  EXPECT_NE(parse_error(plan_text({{1, "  "}})).find("empty instructions"), std::string::npos);
}

TEST(ParsePlan, RenderRoundTripProperty) {
  std::mt19937 rng(5);
  for (int i = 0; i < 300; ++i) {
    Plan p;
    for (int k = 1 + static_cast<int>(rng() % 4); k > 0; --k)
      p.actions.push_back(ActionSpec{*action_from_id(1 + static_cast<int>(rng() % 4)),
                                     "do \"x\" {" + std::to_string(rng()) + "}\n```", {}});
    p.rationale = "r" + std::to_string(rng());
    const auto back = parse_plan(render_plan(p), kAll);
    ASSERT_EQ(back.actions.size(), p.actions.size());
    for (std::size_t k = 0; k < p.actions.size(); ++k) {
      EXPECT_EQ(back.actions[k].kind, p.actions[k].kind);
      EXPECT_EQ(back.actions[k].instructions, p.actions[k].instructions);
    }
    EXPECT_EQ(back.rationale, p.rationale);
  }
}

TEST(ParsePlan, NeverReturnsDisallowedIdsProperty) {
  std::mt19937 rng(6);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::pair<int, std::string>> actions;
    for (int k = 1 + static_cast<int>(rng() % 3); k > 0; --k) actions.push_back({static_cast<int>(rng() % 7) - 1, "x"});
    std::vector<int> allowed;
    for (int id = 1; id <= 4; ++id)
      if (rng() % 2) allowed.push_back(id);
    const std::string raw = plan_text(actions);
    try {
      const auto p = parse_plan(raw, allowed);
      EXPECT_TRUE(validate_plan(p).ok());
      for (const auto& a : p.actions)
        EXPECT_NE(std::find(allowed.begin(), allowed.end(), a.id()), allowed.end());
      EXPECT_EQ(parse_plan(raw, allowed), p);
    } catch (const PlanParseError&) {
    }
  }
}

Task sample_task(std::optional<std::set<int>> allowed = std::nullopt) {
  Task t;
  t.id = "t";
  t.goal = "Generate a title and category for the post";
  t.inputs = {ContentItem::make_text("Post body"), ContentItem::make_image("p.png", "image/png")};
  t.allowed_actions = std::move(allowed);
  return t;
}

PromptArtifact reasoned_for(const Task& t) { return text_prompt("Task: " + t.goal); }

TEST(Plan, ParsesOneCallAndAttachesTaskInputs) {
  const Task t = sample_task();
  ScriptedUnit u(UnitRole::Planner, {plan_text({{3, "write a title"}, {4, "categorize"}})});
  const Plan p = plan(EnvironmentContext{"social media", {}}, t, reasoned_for(t), u.channel);
  ASSERT_EQ(p.actions.size(), 2u);
  EXPECT_EQ(p.actions[0].kind, ActionKind::TitleGeneration);
  EXPECT_EQ(p.actions[1].kind, ActionKind::Categorization);
  EXPECT_EQ(p.actions[0].inputs, t.inputs);
  ASSERT_EQ(u.calls().size(), 1u);
  const std::string body = u.calls()[0].request.flat_text();
  EXPECT_NE(body.find("Environment: social media"), std::string::npos);
  EXPECT_NE(body.find("3. TitleGeneration: Creates a short headline from the input"), std::string::npos);
}

TEST(Plan, MenuListsOnlyPermittedActions) {
  const Task t = sample_task(std::set<int>{1});
  ScriptedUnit u(UnitRole::Planner, {plan_text({{2, "read image"}})});
  try {
    plan({}, t, reasoned_for(t), u.channel);
    FAIL();
  } catch (const PlanParseError& e) {
    EXPECT_NE(std::string(e.what()).find("disallowed action"), std::string::npos);
  }
  EXPECT_EQ(u.calls()[0].request.flat_text().find("2. VQA"), std::string::npos);
}

TEST(Plan, NoStructureCarriesRawOutput) {
  const Task t = sample_task();
  ScriptedUnit u(UnitRole::Planner, {"no structure here"});
  try {
    plan({}, t, reasoned_for(t), u.channel);
    FAIL();
  } catch (const PlanParseError& e) {
    EXPECT_EQ(e.raw(), "no structure here");
  }
}

TEST(Plan, ReasonedPromptMustCarryGoal) {
  const Task t = sample_task();
  ScriptedUnit u(UnitRole::Planner, {plan_text({{1, "a"}})});
  EXPECT_THROW(plan({}, t, text_prompt("unrelated"), u.channel), PreconditionError);
  EXPECT_TRUE(u.calls().empty());
}

TEST(Replan, AddsInstructionsAndSharesParser) {
  const Task t = sample_task();
  const std::string script = plan_text({{1, "answer"}});
  ScriptedUnit a(UnitRole::Planner, {script});
  ScriptedUnit b(UnitRole::Planner, {script});
  const Plan first = plan({}, t, reasoned_for(t), a.channel);
  const Plan second = replan({}, t, reasoned_for(t), RefinedInstructions{"drop action 2", "d"}, b.channel);
  EXPECT_EQ(first, second);
  ASSERT_EQ(second.actions.size(), 1u);
  EXPECT_EQ(second.actions[0].kind, ActionKind::QA);
  ASSERT_EQ(b.calls().size(), 1u);
  EXPECT_NE(b.calls()[0].request.flat_text().find("drop action 2"), std::string::npos);
}

TEST(Replan, EmptyInstructionsRejected) {
  const Task t = sample_task();
  ScriptedUnit u(UnitRole::Planner, {plan_text({{1, "a"}})});
  EXPECT_THROW(replan({}, t, reasoned_for(t), RefinedInstructions{"  ", "d"}, u.channel), PreconditionError);
  EXPECT_TRUE(u.calls().empty());
}

}  // namespace
}  // namespace musa
