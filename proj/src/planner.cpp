// SPDX-License-Identifier: Apache-2.0
#include "musa/planner.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "musa/serialize.hpp"

namespace musa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Body of the first fenced block tagged plan/json/untagged, if any.
std::optional<std::string> first_plan_block(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string line;
  bool inside = false;
  bool accepted = false;
  std::string body;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!inside) {
      if (t.rfind("```", 0) != 0) continue;
      const std::string info = lower(trim(t.substr(3)));
      inside = true;
      accepted = info.empty() || info == "plan" || info == "json";
      body.clear();
      continue;
    }
    if (t == "```") {
      if (accepted) return body;
      inside = false;
      continue;
    }
    if (accepted) {
      body += line;
      body += '\n';
    }
  }
  return std::nullopt;
}

std::string action_menu(const std::vector<int>& ids) {
  std::string out = "Available actions:\n";
  for (int id : ids) {
    auto kind = action_from_id(id);
    if (!kind) continue;
    out += "  " + std::to_string(id) + ". " + std::string(action_name(*kind)) + ": " +
           std::string(action_description(*kind)) + "\n";
  }
  return out;
}

std::string plan_directive(const Task& task) {
  return action_menu(task.permitted_ids()) +
         "Decide which actions, in which order, accomplish the task. Deliberate first, then finish with "
         "exactly one fenced block:\n"
         "```plan\n"
         "{\"actions\": [{\"id\": <action id>, \"instructions\": \"<what the action must do>\"}], "
         "\"rationale\": \"<why this plan>\"}\n"
         "```";
}

Plan run_planner(const EnvironmentContext& env, const Task& task, PromptArtifact prompt, const UnitChannel& planner,
                 std::string_view operation) {
  if (!env.description.empty() && prompt.text().find(env.description) == std::string::npos)
    prompt.segments.insert(prompt.segments.begin(), ContentItem::make_text("Environment: " + env.description));
  prompt.segments.push_back(ContentItem::make_text(plan_directive(task)));
  prompt.provenance = Provenance::UserTask;
  const std::string raw = planner.complete(operation, planner.request_for(prompt)).text;
  Plan result = parse_plan(raw, task.permitted_ids());
  for (auto& action : result.actions) action.inputs = task.inputs;
  return result;
}

void require_goal(const Task& task, const PromptArtifact& reasoned) {
  if (task.goal.empty() || reasoned.text().find(task.goal) == std::string::npos)
    throw PreconditionError("reasoned prompt does not carry the task goal");
}

}  // namespace

Plan parse_plan(std::string_view raw, const std::vector<int>& allowed) {
  const auto block = first_plan_block(raw);
  if (!block) throw PlanParseError("no plan block", std::string(raw));

  Json tree;
  try {
    tree = Json::parse(*block);
  } catch (const Json::parse_error& e) {
    throw PlanParseError(std::string("malformed plan block: ") + e.what(), std::string(raw));
  }
  if (!tree.is_object() || !tree.contains("actions") || !tree["actions"].is_array())
    throw PlanParseError("malformed plan block: expected an object with an actions array", std::string(raw));

  Plan plan;
  plan.raw = std::string(raw);
  if (auto it = tree.find("rationale"); it != tree.end() && it->is_string()) plan.rationale = it->get<std::string>();

  const Json& actions = tree["actions"];
  if (actions.empty()) throw PlanParseError("empty actions", std::string(raw));
  for (const auto& entry : actions) {
    if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_number_integer())
      throw PlanParseError("malformed plan block: action without integer id", std::string(raw));
    const int id = entry["id"].get<int>();
    const auto kind = action_from_id(id);
    if (!kind) throw PlanParseError("unknown action id " + std::to_string(id), std::string(raw));
    if (std::find(allowed.begin(), allowed.end(), id) == allowed.end())
      throw PlanParseError("disallowed action " + std::to_string(id), std::string(raw));
    std::string instructions;
    if (auto it = entry.find("instructions"); it != entry.end() && it->is_string()) instructions = trim(it->get<std::string>());
    if (instructions.empty())
      throw PlanParseError("empty instructions for action " + std::to_string(id), std::string(raw));
    plan.actions.push_back(ActionSpec{*kind, std::move(instructions), {}});
  }
  return plan;
}

std::string render_plan(const Plan& plan) {
  Json actions = Json::array();
  for (const auto& a : plan.actions) {
    actions.push_back(Json{{"id", a.id()}, {"name", std::string(action_name(a.kind))}, {"instructions", a.instructions}});
  }
  const Json block{{"actions", actions}, {"rationale", plan.rationale}};
  return "```plan\n" + block.dump(2, ' ', false, Json::error_handler_t::replace) + "\n```";
}

Plan plan(const EnvironmentContext& env, const Task& task, const PromptArtifact& reasoned, const UnitChannel& planner) {
  require_goal(task, reasoned);
  return run_planner(env, task, reasoned, planner, "plan");
}

Plan replan(const EnvironmentContext& env, const Task& task, const PromptArtifact& reasoned,
            const RefinedInstructions& refined, const UnitChannel& planner) {
  if (trim(refined.instructions).empty()) throw PreconditionError("refined instructions are empty");
  require_goal(task, reasoned);
  PromptArtifact prompt = reasoned;
  prompt.segments.push_back(
      ContentItem::make_text("Corrective instructions for the new plan:\n" + refined.instructions));
  return run_planner(env, task, std::move(prompt), planner, "replan");
}

}  // namespace musa
