// SPDX-License-Identifier: Apache-2.0
//
// Critic and refiner units.
//
// The critic compares the planner's plan (A) with the optimizer's plan (B)
// and must answer in the grammar
//
//   VERDICT: A|B
//   FEEDBACK:
//   <free text, possibly empty>
//
// Feedback is actionable when the FEEDBACK block is non-empty. Only
// actionable critiques reach the refiner.
#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "musa/core.hpp"
#include "musa/error.hpp"
#include "musa/provider.hpp"

namespace musa {

enum class Verdict { PlanA, PlanB };

std::string_view verdict_name(Verdict v) noexcept;

struct Critique {
  Verdict selected = Verdict::PlanA;
  std::string feedback;
  bool actionable = false;
  std::string raw;

  /// Digest of the raw critic output; refined instructions point back to it.
  std::string digest() const;

  friend bool operator==(const Critique&, const Critique&) = default;
};

struct RefinedInstructions {
  std::string instructions;
  std::string derived_from;  // Critique::digest()

  friend bool operator==(const RefinedInstructions&, const RefinedInstructions&) = default;
};

class NotActionableError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Pure parse of raw critic output.
Critique parse_critique(std::string_view raw);

/// One provider call presenting plan A (planner) and plan B (optimizer).
/// When known, the gate divergence is included as context.
Critique criticize(const EnvironmentContext& env, const Task& task, const Plan& plan_a, const Plan& plan_b,
                   const UnitChannel& critic, std::optional<double> divergence = std::nullopt);

/// One provider call turning actionable feedback into planner instructions.
RefinedInstructions refine(const EnvironmentContext& env, const Task& task, const Critique& critique,
                           const UnitChannel& refiner);

}  // namespace musa
