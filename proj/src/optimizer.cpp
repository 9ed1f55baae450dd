// SPDX-License-Identifier: Apache-2.0
#include "musa/optimizer.hpp"

namespace musa {
namespace {

constexpr std::string_view kOptimizerRole =
    "You are an optimizer that critically evaluates text and proposes concrete improvements.";

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

PromptArtifact text_prompt(std::string body, Provenance provenance) {
  PromptArtifact p;
  p.system_role = std::string(kOptimizerRole);
  p.segments.push_back(ContentItem::make_text(std::move(body)));
  p.provenance = provenance;
  return p;
}

void require_variable(const Variable& v) {
  if (blank(v.value)) throw PreconditionError("variable value is empty");
}

}  // namespace

std::string forward(const Variable& variable, const PromptArtifact& context, const UnitChannel& engine) {
  require_variable(variable);
  PromptArtifact prompt = context;
  if (prompt.system_role.empty()) prompt.system_role = std::string(kOptimizerRole);
  prompt.segments.push_back(ContentItem::make_text("Candidate (" + variable.role_note + "):\n" + variable.value +
                                                   "\n\nCarry out the candidate against the task above and "
                                                   "report the resulting output."));
  return engine.complete("forward", engine.request_for(prompt)).text;
}

std::string compute_loss(std::string_view prediction, const TextLoss& loss, const UnitChannel& optimizer) {
  if (blank(prediction)) throw PreconditionError("prediction is empty");
  std::string body = "Evaluation instruction: " + loss.instruction + "\n";
  for (const auto& c : loss.context) body += "\nInitial question:\n" + c + "\n";
  body += "\nInput to evaluate:\n" + std::string(prediction);
  return optimizer.complete("loss", optimizer.request_for(text_prompt(std::move(body), Provenance::OptimizerFeedback)))
      .text;
}

GradientNote gradient(const Variable& variable, std::string_view prediction, std::string_view evaluation,
                      const UnitChannel& optimizer) {
  require_variable(variable);
  if (blank(prediction)) throw PreconditionError("prediction is empty");
  if (blank(evaluation)) throw PreconditionError("evaluation is empty");
  std::string body = "Variable (" + variable.role_note + "):\n" + variable.value + "\n\nPrediction produced from it:\n" +
                     std::string(prediction) + "\n\nEvaluation of the prediction:\n" + std::string(evaluation) +
                     "\n\nGive concrete feedback on how to change the variable so the evaluation improves.";
  auto response =
      optimizer.complete("gradient", optimizer.request_for(text_prompt(std::move(body), Provenance::OptimizerFeedback)));
  if (blank(response.text)) throw Error("optimizer returned empty gradient feedback");
  return GradientNote{response.text, optimizer.config().model_name};
}

Variable step(const Variable& variable, const GradientNote& grad, const TGDConfig& config,
              const UnitChannel& optimizer) {
  require_variable(variable);
  if (blank(grad.feedback)) throw PreconditionError("gradient feedback is empty");
  std::string body = "Variable (" + variable.role_note + "):\n" + variable.value + "\n\nFeedback:\n" + grad.feedback +
                     "\n\nRewrite the variable applying the feedback. Keep its format.";
  if (config.step_directive) body += "\nStep directive: " + *config.step_directive;
  body += "\nReply with the improved variable only. If it cannot be improved, reply " + config.early_stop_marker + ".";
  const std::string out =
      optimizer.complete("step", optimizer.request_for(text_prompt(std::move(body), Provenance::OptimizerFeedback))).text;

  Variable next = variable;
  next.history.push_back(variable.value);
  next.converged = false;
  std::string updated = out;
  if (const auto pos = out.find(config.early_stop_marker); pos != std::string::npos) {
    next.converged = true;
    updated = out.substr(0, pos) + out.substr(pos + config.early_stop_marker.size());
  }
  updated = trim(updated);
  if (!updated.empty()) next.value = std::move(updated);
  return next;
}

Variable optimize(const Variable& initial, const PromptArtifact& context, const TextLoss& loss, const TGDConfig& config,
                  const UnitChannel& optimizer, const UnitChannel* forward_engine) {
  if (config.iterations < 1) throw ConfigError("TGD iterations must be >= 1");
  require_variable(initial);
  const UnitChannel& engine = forward_engine ? *forward_engine : optimizer;
  Variable current = initial;
  current.converged = false;
  for (int i = 0; i < config.iterations; ++i) {
    try {
      const std::string prediction = forward(current, context, engine);
      const std::string evaluation = compute_loss(prediction, loss, optimizer);
      const GradientNote note = gradient(current, prediction, evaluation, optimizer);
      current = step(current, note, config, optimizer);
    } catch (const Error& e) {
      throw OptimizationError(std::string("optimization aborted in iteration ") + std::to_string(i + 1) + ": " +
                                  e.what(),
                              current);
    }
    if (current.converged) break;
  }
  return current;
}

}  // namespace musa
