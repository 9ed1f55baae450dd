// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "musa/core.hpp"
#include "musa/error.hpp"
#include "musa/provider.hpp"

namespace musa {

/// Appended verbatim as the final segment for zero-shot chain of thought.
inline constexpr std::string_view kChainOfThoughtPhrase = "let's think step by step";
/// The single self-reflection instruction.
inline constexpr std::string_view kReflectionInstruction = "apply reflection to the following reasoning trace";

/// Raised when a reflection strategy is applied without a provider.
class StrategyRequiresProviderError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Pure prompt decoration: None, FewShot and ZeroShotCoT. Material is only
/// ever added; user segments are kept verbatim. ZeroShotCoT is idempotent.
PromptArtifact apply_strategy(const PromptArtifact& prompt, const ReasoningStrategy& strategy);

/// Produces the reasoned prompt. Decoration strategies make no provider
/// calls; SelfReflection and CoTAndReflection make exactly two (trace, then
/// reflection) and append both texts to the prompt.
PromptArtifact reason(const PromptArtifact& prompt, const ReasoningStrategy& strategy, const UnitChannel& reasoner);

}  // namespace musa
