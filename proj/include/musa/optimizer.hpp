// SPDX-License-Identifier: Apache-2.0
//
// Textual gradient descent.
//
// One iteration is four provider calls in fixed order:
//   forward   -> prediction y for the variable
//   loss      -> critical evaluation of y under the TextLoss
//   gradient  -> improvement feedback for the variable given (x, y, evaluation)
//   step      -> the variable rewritten with that feedback applied
// The loop stops early when a step emits the early-stop marker.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "musa/core.hpp"
#include "musa/error.hpp"
#include "musa/provider.hpp"

namespace musa {

/// The text under optimization.
struct Variable {
  std::string value;
  std::string role_note;              // what the variable is, shown to the optimizer model
  std::vector<std::string> history;   // prior values, oldest first
  bool converged = false;             // the last step emitted the early-stop marker

  friend bool operator==(const Variable&, const Variable&) = default;
};

struct TextLoss {
  std::string instruction{kDefaultTextLoss};
  std::vector<std::string> context;  // the initial questions / task statement

  friend bool operator==(const TextLoss&, const TextLoss&) = default;
};

struct GradientNote {
  std::string feedback;
  std::string produced_by;  // model name of the optimizer backend

  friend bool operator==(const GradientNote&, const GradientNote&) = default;
};

struct TGDConfig {
  int iterations = 1;
  std::optional<std::string> step_directive;  // natural-language step size, e.g. "make minimal edits"
  std::string early_stop_marker{kDefaultEarlyStopMarker};
};

/// Provider failure inside optimize(); carries the variable as far as it got.
class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& what, Variable partial) : Error(what), partial_(std::move(partial)) {}
  const Variable& partial() const noexcept { return partial_; }

 private:
  Variable partial_;
};

std::string forward(const Variable& variable, const PromptArtifact& context, const UnitChannel& engine);
std::string compute_loss(std::string_view prediction, const TextLoss& loss, const UnitChannel& optimizer);
GradientNote gradient(const Variable& variable, std::string_view prediction, std::string_view evaluation,
                      const UnitChannel& optimizer);
Variable step(const Variable& variable, const GradientNote& grad, const TGDConfig& config,
              const UnitChannel& optimizer);

/// Runs config.iterations cycles of forward/loss/gradient/step. The forward
/// pass uses `forward_engine` when given, the optimizer channel otherwise.
Variable optimize(const Variable& initial, const PromptArtifact& context, const TextLoss& loss, const TGDConfig& config,
                  const UnitChannel& optimizer, const UnitChannel* forward_engine = nullptr);

}  // namespace musa
