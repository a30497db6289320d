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

#ifndef LOGITSTEER_LANGUAGE_MODEL_HPP_
#define LOGITSTEER_LANGUAGE_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "logitsteer/error.hpp"
#include "logitsteer/vocab.hpp"

namespace logitsteer {

// Dense per-token scores over the vocabulary. Entries equal to kMasked are
// excluded from the support; everything else must be a finite real.
using LogitVector = std::vector<double>;

// Dense distribution over the vocabulary.
using ProbabilityVector = std::vector<double>;

inline constexpr double kMasked = -std::numeric_limits<double>::infinity();

inline bool is_masked(double logit) { return logit == kMasked; }

// Anything that maps a token context to next-token logits over a vocabulary.
// The context is the raw history (prompt plus generated tokens); models apply
// their own start-of-sequence padding.
template <class M>
concept LanguageModel = requires(const M& model, std::span<const TokenId> context) {
  { model.vocab() } -> std::convertible_to<const Vocabulary&>;
  { model.logits(context) } -> std::convertible_to<LogitVector>;
};

// softmax(z), masked entries get exactly 0.
inline ProbabilityVector softmax(std::span<const double> logits) {
  double max_logit = kMasked;
  for (double z : logits) {
    if (std::isnan(z)) throw Error("NaN logit");
    if (!is_masked(z)) max_logit = std::max(max_logit, z);
  }
  if (is_masked(max_logit)) throw Error("empty support");
  ProbabilityVector probs(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t v = 0; v < logits.size(); ++v) {
    if (is_masked(logits[v])) continue;
    probs[v] = std::exp(logits[v] - max_logit);
    total += probs[v];
  }
  for (double& p : probs) p /= total;
  return probs;
}

// Natural log of P(next | context). Uses a model's own log_prob when it has
// one, otherwise normalizes the full logit vector.
template <LanguageModel M>
double next_token_log_prob(const M& model, std::span<const TokenId> context,
                           TokenId next) {
  if constexpr (requires { { model.log_prob(context, next) } -> std::convertible_to<double>; }) {
    return model.log_prob(context, next);
  } else {
    const LogitVector logits = model.logits(context);
    if (next >= logits.size()) throw Error("invalid token id");
    const ProbabilityVector probs = softmax(logits);
    return std::log(probs[next]);
  }
}

// exp(-(1/T) * sum_t log P(x_t | x_<t)).
template <LanguageModel M>
double perplexity(const M& model, std::span<const TokenId> ids) {
  if (ids.empty()) throw Error("empty sequence");
  double total = 0.0;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    total += next_token_log_prob(model, ids.first(t), ids[t]);
  }
  return std::exp(-total / static_cast<double>(ids.size()));
}

}  // namespace logitsteer

#endif  // LOGITSTEER_LANGUAGE_MODEL_HPP_
