// SPDX-License-Identifier: Apache-2.0
#include "musa/divergence.hpp"

#include <algorithm>
#include <cmath>

namespace musa {
namespace {

// Sum of p_i * log2(p_i / m_i), skipping p_i == 0.
double kl_to_mid(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    const double m = 0.5 * (p[i] + q[i]);
    sum += p[i] * std::log2(p[i] / m);
  }
  return sum;
}

}  // namespace

bool Distribution::valid() const noexcept {
  if (probabilities.empty()) return false;
  double sum = 0.0;
  for (double x : probabilities) {
    if (!std::isfinite(x) || x < 0.0) return false;
    sum += x;
  }
  const double tol = 1e-12 * std::max<double>(1.0, static_cast<double>(probabilities.size()));
  return std::fabs(sum - 1.0) <= tol;
}

Distribution to_distribution(const EmbeddingVector& v) {
  for (double x : v.components) {
    if (!std::isfinite(x)) throw DivergenceError("embedding has a non-finite component");
  }
  if (v.dimension() < 2) throw DivergenceError("embedding dimension must be >= 2");
  const double top = *std::max_element(v.components.begin(), v.components.end());
  Distribution d;
  d.probabilities.reserve(v.dimension());
  double sum = 0.0;
  for (double x : v.components) {
    const double e = std::exp(x - top);
    d.probabilities.push_back(e);
    sum += e;
  }
  for (double& x : d.probabilities) x /= sum;
  return d;
}

double jsd(const Distribution& p, const Distribution& q) {
  if (p.probabilities.size() != q.probabilities.size())
    throw DivergenceError("distribution length mismatch: " + std::to_string(p.probabilities.size()) + " vs " +
                          std::to_string(q.probabilities.size()));
  if (!p.valid() || !q.valid()) throw DivergenceError("invalid distribution");
  if (p.probabilities == q.probabilities) return 0.0;
  const double value = 0.5 * kl_to_mid(p.probabilities, q.probabilities) +
                       0.5 * kl_to_mid(q.probabilities, p.probabilities);
  return std::clamp(value, 0.0, 1.0);
}

GateDecision gate(double divergence, double theta) { return GateDecision{divergence, divergence >= theta}; }

GateDecision should_criticize(std::string_view plan_text, std::string_view optimized_text, const UnitChannel& embedder,
                              double theta) {
  if (plan_text.empty() || optimized_text.empty()) throw PreconditionError("gate texts must be non-empty");
  if (!(theta >= 0.0 && theta <= 1.0)) throw PreconditionError("theta must be in [0,1]");
  const auto a = embedder.embed("encode", plan_text);
  const auto b = embedder.embed("encode", optimized_text);
  return gate(jsd(to_distribution(a), to_distribution(b)), theta);
}

}  // namespace musa
