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

// Base-model truncation, sampling and the autoregressive steering loop.
//
// Each step:
//   1. z   = base logits on prompt + generated tokens
//            (top-K view first when only K base log-probabilities are visible)
//   2. V'  = top-p / top-k set of softmax(z), computed from the base model alone
//   3. z'  = z on V', masked elsewhere
//   4. P~' = combine(z', expert logits, anti-expert logits, alpha, temperature)
//   5. x   ~ P~' by inverse CDF; stop on </s>
//
// Experts never influence V', so no token outside the base nucleus can be
// sampled.

#ifndef LOGITSTEER_DECODING_HPP_
#define LOGITSTEER_DECODING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "logitsteer/ensemble.hpp"
#include "logitsteer/error.hpp"
#include "logitsteer/language_model.hpp"
#include "logitsteer/random.hpp"
#include "logitsteer/vocab.hpp"

namespace logitsteer {

struct TruncationConfig {
  enum class Kind { kTopP, kTopK, kNone };

  Kind kind = Kind::kTopP;
  double p = 0.9;
  std::size_t k = 0;

  static TruncationConfig top_p(double p) { return {Kind::kTopP, p, 0}; }
  static TruncationConfig top_k(std::size_t k) { return {Kind::kTopK, 1.0, k}; }
  static TruncationConfig none() { return {Kind::kNone, 1.0, 0}; }

  void validate() const {
    if (kind == Kind::kTopP && !(p > 0.0 && p <= 1.0)) throw Error("top-p must be in (0, 1]");
    if (kind == Kind::kTopK && k < 1) throw Error("top-k must be at least 1");
  }
};

struct GenerationConfig {
  std::size_t num_samples = 25;
  std::size_t max_len = 20;
  TruncationConfig truncation = TruncationConfig::top_p(0.9);
  double temperature = 1.0;
  std::uint64_t seed = 0;
  // Only the top `partial_k` base logits are observable (API-style access).
  std::optional<std::size_t> partial_k;
  // When false, </s> is removed from the base distribution and every
  // continuation runs to max_len.
  bool stop_at_eos = true;

  void validate() const {
    if (num_samples < 1) throw Error("num_samples must be positive");
    if (max_len < 1) throw Error("max_len must be positive");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
      throw Error("temperature must be positive");
    }
    if (partial_k && *partial_k < 1) throw Error("partial-k must be at least 1");
    truncation.validate();
  }
};

namespace detail {

// Ids with finite/nonzero weight, sorted by descending value then ascending id.
inline std::vector<TokenId> rank_descending(std::span<const double> values, bool (*keep)(double)) {
  std::vector<TokenId> order;
  order.reserve(values.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    if (keep(values[v])) order.push_back(static_cast<TokenId>(v));
  }
  std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  return order;
}

}  // namespace detail

// The candidate set V' of a base distribution, in ascending id order.
inline std::vector<TokenId> nucleus_set(std::span<const double> probs,
                                        const TruncationConfig& config) {
  config.validate();
  std::vector<TokenId> order =
      detail::rank_descending(probs, [](double p) { return p > 0.0; });
  switch (config.kind) {
    case TruncationConfig::Kind::kTopP: {
      if (config.p >= 1.0) break;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < order.size(); ++i) {
        cumulative += probs[order[i]];
        if (cumulative >= config.p) {
          order.resize(i + 1);
          break;
        }
      }
      break;
    }
    case TruncationConfig::Kind::kTopK:
      if (order.size() > config.k) order.resize(config.k);
      break;
    case TruncationConfig::Kind::kNone:
      break;
  }
  std::sort(order.begin(), order.end());
  return order;
}

// z on `kept`, kMasked elsewhere.
inline LogitVector truncate(std::span<const double> logits, std::span<const TokenId> kept) {
  if (kept.empty()) throw Error("empty truncation set");
  LogitVector out(logits.size(), kMasked);
  for (TokenId id : kept) {
    if (id >= logits.size()) throw Error("invalid token id");
    out[id] = logits[id];
  }
  return out;
}

// Keeps the K largest logits (ties toward lower ids) and masks the rest.
inline LogitVector partial_logits_view(std::span<const double> logits, std::size_t k) {
  if (k < 1) throw Error("partial-k must be at least 1");
  std::vector<TokenId> order =
      detail::rank_descending(logits, [](double z) { return !is_masked(z); });
  if (order.size() > k) order.resize(k);
  return truncate(logits, order);
}

// Inverse-CDF draw in token-id order over the nonzero entries of `probs`,
// for a uniform value u in [0, 1).
inline TokenId sample_at(std::span<const double> probs, double u) {
  double total = 0.0;
  std::optional<TokenId> last;
  for (std::size_t v = 0; v < probs.size(); ++v) {
    if (probs[v] > 0.0) {
      total += probs[v];
      last = static_cast<TokenId>(v);
    }
  }
  if (!last) throw Error("empty support");
  const double target = u * total;
  double cumulative = 0.0;
  for (std::size_t v = 0; v < probs.size(); ++v) {
    if (!(probs[v] > 0.0)) continue;
    cumulative += probs[v];
    if (target < cumulative) return static_cast<TokenId>(v);
  }
  return *last;
}

inline TokenId sample(std::span<const double> probs, RandomSource& rng) {
  return sample_at(probs, rng.uniform());
}

// One decoding step, reported to an observer when auditing.
struct StepRecord {
  std::size_t step = 0;
  std::vector<TokenId> support;  // V' at this step
  TokenId token = 0;
};

using StepObserver = std::function<void(const StepRecord&)>;

// Next-token distribution of the steered ensemble after `context`. If
// `support` is non-null it receives V'.
template <LanguageModel M>
ProbabilityVector next_token_distribution(const EnsembleSpec<M>& spec,
                                          std::span<const TokenId> context,
                                          const GenerationConfig& gen,
                                          std::vector<TokenId>* support = nullptr) {
  LogitVector base = spec.base.get().logits(context);
  if (!gen.stop_at_eos && Vocabulary::kEos < base.size()) base[Vocabulary::kEos] = kMasked;
  if (gen.partial_k) base = partial_logits_view(base, *gen.partial_k);
  const ProbabilityVector base_probs = softmax(base);
  std::vector<TokenId> kept = nucleus_set(base_probs, gen.truncation);
  const LogitVector truncated = truncate(base, kept);
  if (support != nullptr) *support = std::move(kept);

  auto query = [&](const std::vector<std::reference_wrapper<const M>>& group) {
    std::vector<LogitVector> out;
    out.reserve(group.size());
    for (const auto& model : group) out.push_back(model.get().logits(context));
    return out;
  };
  switch (spec.mode) {
    case SteeringMode::kFull:
      return combine(truncated, query(spec.experts), query(spec.anti_experts), spec.alpha,
                     gen.temperature);
    case SteeringMode::kAntiOnly:
      return combine_anti_only(truncated, query(spec.anti_experts), spec.alpha,
                               gen.temperature);
    case SteeringMode::kNone:
      break;
  }
  return combine(truncated, {}, {}, 0.0, gen.temperature);
}

// Samples one continuation (without </s>) of at most gen.max_len tokens.
template <LanguageModel M>
std::vector<TokenId> generate(const EnsembleSpec<M>& spec, std::span<const TokenId> prompt,
                              const GenerationConfig& gen, RandomSource& rng,
                              const StepObserver& observer = {}) {
  spec.validate();
  gen.validate();
  const Vocabulary& vocab = spec.base.get().vocab();
  for (TokenId id : prompt) {
    if (!vocab.contains(id)) throw Error("invalid token id");
  }
  std::vector<TokenId> context(prompt.begin(), prompt.end());
  std::vector<TokenId> continuation;
  for (std::size_t step = 0; step < gen.max_len; ++step) {
    StepRecord record;
    record.step = step;
    const ProbabilityVector probs = next_token_distribution(
        spec, context, gen, observer ? &record.support : nullptr);
    const TokenId token = sample(probs, rng);
    if (observer) {
      record.token = token;
      observer(record);
    }
    if (token == Vocabulary::kEos) break;
    continuation.push_back(token);
    context.push_back(token);
  }
  return continuation;
}

}  // namespace logitsteer

#endif  // LOGITSTEER_DECODING_HPP_
