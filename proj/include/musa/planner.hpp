// SPDX-License-Identifier: Apache-2.0
//
// Planner unit. The model deliberates freely and then emits one fenced block
//
//   ```plan
//   {"actions": [{"id": 3, "instructions": "..."}], "rationale": "..."}
//   ```
//
// Only the first fenced block tagged `plan` or `json` (or untagged) is read.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "musa/core.hpp"
#include "musa/critic.hpp"
#include "musa/error.hpp"
#include "musa/provider.hpp"

namespace musa {

/// Extracts and validates the plan block. Throws PlanParseError with reason
/// "no plan block", "malformed plan block", "empty actions",
/// "unknown action id N", "disallowed action N" or "empty instructions".
Plan parse_plan(std::string_view raw, const std::vector<int>& allowed);

/// Renders a plan as its fenced block; parse_plan(render_plan(p)) recovers p's
/// actions and rationale.
std::string render_plan(const Plan& plan);

/// Initial plan state: one provider call.
Plan plan(const EnvironmentContext& env, const Task& task, const PromptArtifact& reasoned, const UnitChannel& planner);

/// Next plan state from refined instructions: one provider call, same parser.
Plan replan(const EnvironmentContext& env, const Task& task, const PromptArtifact& reasoned,
            const RefinedInstructions& refined, const UnitChannel& planner);

}  // namespace musa
