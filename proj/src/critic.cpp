// SPDX-License-Identifier: Apache-2.0
#include "musa/critic.hpp"

#include <cctype>
#include <cstdio>
#include <optional>
#include <sstream>

#include "musa/digest.hpp"
#include "musa/planner.hpp"

namespace musa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

constexpr std::string_view kCriticRole =
    "You are a critic that compares two candidate plans for the same task and selects the more suitable one.";
constexpr std::string_view kRefinerRole =
    "You are a refiner that turns a critique into actionable instructions for a planner.";

PromptArtifact text_prompt(std::string_view role, std::string body, Provenance provenance) {
  PromptArtifact p;
  p.system_role = std::string(role);
  p.segments.push_back(ContentItem::make_text(std::move(body)));
  p.provenance = provenance;
  return p;
}

}  // namespace

std::string_view verdict_name(Verdict v) noexcept { return v == Verdict::PlanA ? "A" : "B"; }

std::string Critique::digest() const { return short_digest(raw); }

Critique parse_critique(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string line;
  std::optional<Verdict> verdict;
  bool in_feedback = false;
  std::string feedback;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!verdict && !in_feedback && starts_with_ci(t, "VERDICT:")) {
      const std::string v = trim(std::string_view(t).substr(8));
      if (v == "A" || v == "a") {
        verdict = Verdict::PlanA;
      } else if (v == "B" || v == "b") {
        verdict = Verdict::PlanB;
      } else {
        throw CritiqueParseError("verdict must be A or B, got '" + v + "'", std::string(raw));
      }
      continue;
    }
    if (verdict && !in_feedback && starts_with_ci(t, "FEEDBACK:")) {
      in_feedback = true;
      const auto pos = line.find(':');
      feedback = line.substr(pos + 1);
      feedback += '\n';
      continue;
    }
    if (in_feedback) {
      feedback += line;
      feedback += '\n';
    }
  }
  if (!verdict) throw CritiqueParseError("no verdict line", std::string(raw));

  Critique c;
  c.selected = *verdict;
  c.feedback = trim(feedback);
  c.actionable = !c.feedback.empty();
  c.raw = std::string(raw);
  return c;
}

Critique criticize(const EnvironmentContext& env, const Task& task, const Plan& plan_a, const Plan& plan_b,
                   const UnitChannel& critic, std::optional<double> divergence) {
  std::string body;
  if (!env.description.empty()) body += "Environment: " + env.description + "\n\n";
  body += "Task: " + task.goal + "\n\n";
  body += "Plan A (planner):\n" + render_plan(plan_a) + "\n\n";
  body += "Plan B (optimizer):\n" + render_plan(plan_b) + "\n\n";
  if (divergence) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", *divergence);
    body += std::string("Jensen-Shannon divergence between the two plans: ") + buf + "\n\n";
  }
  body +=
      "Judge which plan better accomplishes the task: are the chosen actions suited to the goal and the inputs, "
      "are they in a sensible order, and are the instructions specific enough to execute?\n"
      "Reply in exactly this format:\n"
      "VERDICT: A or B\n"
      "FEEDBACK:\n"
      "<what the planner should change; leave empty if nothing>";
  const std::string raw =
      critic.complete("criticize", critic.request_for(text_prompt(kCriticRole, std::move(body), Provenance::CriticFeedback)))
          .text;
  return parse_critique(raw);
}

RefinedInstructions refine(const EnvironmentContext& env, const Task& task, const Critique& critique,
                           const UnitChannel& refiner) {
  if (!critique.actionable) throw NotActionableError("critique has no actionable feedback");
  std::string body;
  if (!env.description.empty()) body += "Environment: " + env.description + "\n\n";
  body += "Task: " + task.goal + "\n\n";
  body += "The critic preferred plan " + std::string(verdict_name(critique.selected)) + " and said:\n" +
          critique.feedback + "\n\n";
  body += "Translate this critique into concise, actionable instructions for the planner to produce a new plan.";
  const std::string out = trim(
      refiner.complete("refine", refiner.request_for(text_prompt(kRefinerRole, std::move(body), Provenance::RefinerOutput)))
          .text);
  if (out.empty()) throw Error("refiner returned empty instructions");
  return RefinedInstructions{out, critique.digest()};
}

}  // namespace musa
