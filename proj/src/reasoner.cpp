// SPDX-License-Identifier: Apache-2.0
#include "musa/reasoner.hpp"

#include <algorithm>

namespace musa {
namespace {

// The decoration is recognized by its segment, not by the attached strategy:
// prompts built for a CoT strategy carry it before they are decorated.
bool has_cot_phrase(const PromptArtifact& p) {
  return std::any_of(p.segments.begin(), p.segments.end(),
                     [](const ContentItem& c) { return c.is_text() && c.text == kChainOfThoughtPhrase; });
}

void validate_prompt(const PromptArtifact& prompt) {
  if (prompt.segments.empty()) throw PreconditionError("prompt has no segments");
}

PromptArtifact with_cot(const PromptArtifact& prompt) {
  PromptArtifact out = prompt;
  if (!has_cot_phrase(prompt)) out.segments.push_back(ContentItem::make_text(std::string(kChainOfThoughtPhrase)));
  return out;
}

}  // namespace

PromptArtifact apply_strategy(const PromptArtifact& prompt, const ReasoningStrategy& strategy) {
  validate_prompt(prompt);
  switch (strategy.kind) {
    case StrategyKind::None:
      return prompt;
    case StrategyKind::FewShot: {
      if (strategy.examples.empty()) throw PreconditionError("few-shot strategy needs at least one example");
      PromptArtifact out = prompt;
      std::vector<ContentItem> demos;
      demos.reserve(strategy.examples.size());
      for (const auto& ex : strategy.examples) {
        demos.push_back(ContentItem::make_text("Example input:\n" + ex.input + "\nExample output:\n" + ex.output));
      }
      out.segments.insert(out.segments.begin(), demos.begin(), demos.end());
      out.strategy = strategy;
      return out;
    }
    case StrategyKind::ZeroShotCoT: {
      PromptArtifact out = with_cot(prompt);
      out.strategy = strategy;
      return out;
    }
    case StrategyKind::SelfReflection:
    case StrategyKind::CoTAndReflection:
      break;
  }
  throw StrategyRequiresProviderError("strategy '" + std::string(strategy_name(strategy.kind)) +
                                      "' requires a provider; use reason()");
}

PromptArtifact reason(const PromptArtifact& prompt, const ReasoningStrategy& strategy, const UnitChannel& reasoner) {
  if (strategy.kind != StrategyKind::SelfReflection && strategy.kind != StrategyKind::CoTAndReflection)
    return apply_strategy(prompt, strategy);
  validate_prompt(prompt);

  // The trace is always elicited with the chain-of-thought decoration.
  const PromptArtifact cot = with_cot(prompt);
  const std::string trace = reasoner.complete("reason.trace", reasoner.request_for(cot)).text;

  PromptArtifact reflect = prompt;
  reflect.segments.push_back(ContentItem::make_text(std::string(kReflectionInstruction) + ":\n\n" + trace));
  const std::string reflection = reasoner.complete("reason.reflect", reasoner.request_for(reflect)).text;

  PromptArtifact out = strategy.kind == StrategyKind::CoTAndReflection ? cot : prompt;
  out.segments.push_back(ContentItem::make_text("Reasoning trace:\n" + trace));
  out.segments.push_back(ContentItem::make_text("Reflection:\n" + reflection));
  out.strategy = strategy;
  return out;
}

}  // namespace musa
