// SPDX-License-Identifier: Apache-2.0
//
// Critic gate: embeddings -> softmax distributions -> Jensen-Shannon
// divergence (base 2, so the value lies in [0,1]) compared against theta.
#pragma once

#include <string_view>
#include <vector>

#include "musa/error.hpp"
#include "musa/provider.hpp"

namespace musa {

class DivergenceError : public Error {
 public:
  using Error::Error;
};

struct Distribution {
  std::vector<double> probabilities;

  /// Non-negative entries summing to 1 within 1e-12 (scaled by length).
  bool valid() const noexcept;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Max-shifted softmax. Throws DivergenceError on invalid input.
Distribution to_distribution(const EmbeddingVector& v);

/// Base-2 Jensen-Shannon divergence. Throws DivergenceError on length
/// mismatch or invalid distributions.
double jsd(const Distribution& p, const Distribution& q);

struct GateDecision {
  double divergence = 0.0;
  bool activate = false;
};

/// Pure comparison: activate iff divergence >= theta.
GateDecision gate(double divergence, double theta);

/// Embeds both texts (two calls, operation "encode") and applies the gate.
GateDecision should_criticize(std::string_view plan_text, std::string_view optimized_text, const UnitChannel& embedder,
                              double theta);

}  // namespace musa
