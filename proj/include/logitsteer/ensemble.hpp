// Copyright 2026 The logitsteer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Product-of-experts combination of next-token logits.
//
// Given base logits z (possibly truncated, masked entries = kMasked), expert
// logits z+_1..z+_m and anti-expert logits z-_1..z-_r:
//
//   P~ = softmax( (z + alpha * (sum_j z+_j - sum_j z-_j)) / temperature )
//
// Masked base entries stay masked whatever the experts say, so steering can
// only reweight tokens the base model already admitted.

#ifndef LOGITSTEER_ENSEMBLE_HPP_
#define LOGITSTEER_ENSEMBLE_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "logitsteer/error.hpp"
#include "logitsteer/language_model.hpp"

namespace logitsteer {

namespace detail {

inline void check_same_length(std::span<const double> base, std::span<const LogitVector> group) {
  for (const LogitVector& z : group) {
    if (z.size() != base.size()) throw Error("logit vector length mismatch");
  }
}

// Sum of the group at position v. Isolated so that a different reduction
// (e.g. averaging) is a one-line change.
inline double group_logit(std::span<const LogitVector> group, std::size_t v) {
  double sum = 0.0;
  for (const LogitVector& z : group) {
    const double value = z[v];
    if (!std::isfinite(value)) throw Error("expert logits must be finite on the base support");
    sum += value;
  }
  return sum;
}

}  // namespace detail

inline ProbabilityVector combine(std::span<const double> base,
                                 std::span<const LogitVector> experts,
                                 std::span<const LogitVector> anti_experts, double alpha,
                                 double temperature = 1.0) {
  if (!std::isfinite(alpha)) throw Error("alpha must be finite");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error("temperature must be positive");
  }
  detail::check_same_length(base, experts);
  detail::check_same_length(base, anti_experts);
  LogitVector steered(base.size(), kMasked);
  bool any = false;
  for (std::size_t v = 0; v < base.size(); ++v) {
    const double z = base[v];
    if (std::isnan(z)) throw Error("NaN logit");
    if (is_masked(z)) continue;
    if (!std::isfinite(z)) throw Error("base logits must be finite or masked");
    const double delta =
        detail::group_logit(experts, v) - detail::group_logit(anti_experts, v);
    steered[v] = (z + alpha * delta) / temperature;
    any = true;
  }
  if (!any) throw Error("empty support");
  return softmax(steered);
}

// softmax(((1 + alpha) z - alpha * sum z-) / temperature): the base model acts
// as its own expert. Evaluated through combine() with z as the single expert,
// so both paths agree bit for bit.
inline ProbabilityVector combine_anti_only(std::span<const double> base,
                                           std::span<const LogitVector> anti_experts,
                                           double alpha, double temperature = 1.0) {
  // Masked base entries never read the expert value, so copying them is harmless.
  const std::vector<LogitVector> self{LogitVector(base.begin(), base.end())};
  return combine(base, self, anti_experts, alpha, temperature);
}

// normalize(p * (p+ / p-)^alpha), computed directly in probability space.
// Serves as an independent check on combine() for the untruncated
// single-expert case.
inline ProbabilityVector ratio_form(std::span<const double> p_base,
                                   std::span<const double> p_plus,
                                   std::span<const double> p_minus, double alpha) {
  if (p_plus.size() != p_base.size() || p_minus.size() != p_base.size()) {
    throw Error("probability vector length mismatch");
  }
  ProbabilityVector out(p_base.size());
  double total = 0.0;
  for (std::size_t v = 0; v < p_base.size(); ++v) {
    if (!(p_base[v] > 0.0) || !(p_plus[v] > 0.0) || !(p_minus[v] > 0.0)) {
      throw Error("ratio form requires positive probabilities");
    }
    out[v] = p_base[v] * std::pow(p_plus[v] / p_minus[v], alpha);
    total += out[v];
  }
  for (double& p : out) p /= total;
  return out;
}

enum class SteeringMode {
  kFull,      // base + alpha * (experts - anti-experts)
  kAntiOnly,  // base is its own expert
  kNone,      // plain sampling from the base model
};

// The models and steering strength for one decoding configuration. All
// members must share one vocabulary.
template <LanguageModel M>
struct EnsembleSpec {
  std::reference_wrapper<const M> base;
  std::vector<std::reference_wrapper<const M>> experts;
  std::vector<std::reference_wrapper<const M>> anti_experts;
  double alpha = 0.0;
  SteeringMode mode = SteeringMode::kFull;

  void validate() const {
    switch (mode) {
      case SteeringMode::kFull:
        if (experts.empty() && anti_experts.empty()) {
          throw Error("full steering needs at least one expert or anti-expert");
        }
        break;
      case SteeringMode::kAntiOnly:
        if (!experts.empty() || anti_experts.empty()) {
          throw Error("anti-only steering needs anti-experts and no experts");
        }
        break;
      case SteeringMode::kNone:
        if (!experts.empty() || !anti_experts.empty()) {
          throw Error("unsteered decoding takes no experts");
        }
        break;
    }
    if (!std::isfinite(alpha)) throw Error("alpha must be finite");
    const Vocabulary& vocab = base.get().vocab();
    for (const auto& group : {std::cref(experts), std::cref(anti_experts)}) {
      for (const auto& model : group.get()) {
        if (!(model.get().vocab() == vocab)) throw Error("vocabulary mismatch");
      }
    }
  }
};

}  // namespace logitsteer

#endif  // LOGITSTEER_ENSEMBLE_HPP_
