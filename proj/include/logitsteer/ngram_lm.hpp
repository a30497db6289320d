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

// Interpolated n-gram language model.
//
// P(v | h) = ( sum_i lambda_i * MLE_i(v | h_i) + lambda_u / |V| ) / Z
//
// where h_i is the last i-1 tokens of the BOS-padded history, MLE_i is the
// relative frequency of v after h_i, and Z is the sum of lambda_u and the
// lambdas of every order whose context h_i was observed in training. Orders
// with unseen contexts therefore drop out and the remaining weights are
// renormalized. The uniform floor keeps every probability at or above
// lambda_u / |V|.
//
// Weights are listed highest order first with the uniform weight last, e.g.
// the default {0.4, 0.3, 0.2, 0.1} for a trigram model.

#ifndef LOGITSTEER_NGRAM_LM_HPP_
#define LOGITSTEER_NGRAM_LM_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"
#include "logitsteer/error.hpp"
#include "logitsteer/io.hpp"
#include "logitsteer/language_model.hpp"
#include "logitsteer/vocab.hpp"

namespace logitsteer {

struct NGramOptions {
  std::size_t order = 3;
  std::vector<double> lambdas{0.4, 0.3, 0.2, 0.1};
  // Stop after exactly this many corpus tokens (documents in order, the last
  // one cut mid-way). Unset means the whole corpus.
  std::optional<std::uint64_t> max_tokens;
};

namespace detail {

struct ContextLess {
  using is_transparent = void;
  template <class A, class B>
  bool operator()(const A& a, const B& b) const {
    return std::lexicographical_compare(std::begin(a), std::end(a), std::begin(b),
                                        std::end(b));
  }
};

inline void validate_lambdas(std::size_t order, std::span<const double> lambdas) {
  if (order < 1) throw Error("order must be at least 1");
  if (lambdas.size() != order + 1) {
    throw Error("expected " + std::to_string(order + 1) +
                " interpolation weights (one per order plus uniform)");
  }
  double sum = 0.0;
  for (double w : lambdas) {
    if (!std::isfinite(w) || w < 0.0) throw Error("interpolation weights must be >= 0");
    sum += w;
  }
  if (!(lambdas.back() > 0.0)) throw Error("uniform interpolation weight must be > 0");
  if (std::abs(sum - 1.0) > 1e-12) throw Error("interpolation weights must sum to 1");
}

inline std::string context_key(std::span<const TokenId> context) {
  std::string key;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i > 0) key.push_back(' ');
    key += std::to_string(context[i]);
  }
  return key;
}

inline TokenId parse_token_id(std::string_view text, std::size_t vocab_size) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("malformed token id '" + std::string(text) + "'");
  }
  if (value >= vocab_size) throw ParseError("token id out of range: " + std::string(text));
  return static_cast<TokenId>(value);
}

inline std::vector<TokenId> parse_context_key(std::string_view key, std::size_t vocab_size) {
  std::vector<TokenId> context;
  if (key.empty()) return context;
  std::size_t start = 0;
  while (true) {
    const std::size_t space = key.find(' ', start);
    const std::string_view part =
        key.substr(start, space == std::string_view::npos ? std::string_view::npos : space - start);
    context.push_back(parse_token_id(part, vocab_size));
    if (space == std::string_view::npos) break;
    start = space + 1;
  }
  return context;
}

}  // namespace detail

class NGramModel {
 public:
  static constexpr int kFormatVersion = 1;

  static NGramModel train(std::span<const std::string> corpus, Vocabulary vocab,
                          const NGramOptions& options = {}) {
    std::vector<std::vector<TokenId>> docs;
    docs.reserve(corpus.size());
    for (const std::string& doc : corpus) docs.push_back(encode(vocab, doc));
    return train_encoded(docs, std::move(vocab), options);
  }

  static NGramModel train_encoded(std::span<const std::vector<TokenId>> docs,
                                  Vocabulary vocab, const NGramOptions& options = {}) {
    detail::validate_lambdas(options.order, options.lambdas);
    if (docs.empty() || (options.max_tokens && *options.max_tokens == 0)) {
      throw Error("no training data");
    }
    NGramModel model(std::move(vocab), options.order, options.lambdas);
    const std::size_t n = options.order;
    std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>, detail::ContextLess> raw;
    auto observe = [&](const std::vector<TokenId>& history, TokenId next) {
      for (std::size_t i = 1; i <= n; ++i) {
        std::vector<TokenId> context(history.end() - static_cast<std::ptrdiff_t>(i - 1),
                                     history.end());
        ++raw[std::move(context)][next];
      }
    };

    std::uint64_t consumed = 0;
    for (const auto& doc : docs) {
      if (options.max_tokens && consumed >= *options.max_tokens) break;
      std::vector<TokenId> history(n - 1, Vocabulary::kBos);
      bool truncated = false;
      for (TokenId id : doc) {
        if (!model.vocab_.contains(id)) throw Error("invalid token id");
        if (options.max_tokens && consumed == *options.max_tokens) {
          truncated = true;
          break;
        }
        observe(history, id);
        history.push_back(id);
        ++consumed;
      }
      if (!truncated) observe(history, Vocabulary::kEos);
    }
    if (consumed == 0) throw Error("no training data");

    for (auto& [context, nexts] : raw) {
      ContextCounts counts;
      counts.next.assign(nexts.begin(), nexts.end());
      for (const auto& entry : counts.next) counts.total += entry.second;
      model.counts_.emplace(context, std::move(counts));
    }
    model.trained_token_count_ = consumed;
    return model;
  }

  const Vocabulary& vocab() const { return vocab_; }
  std::size_t order() const { return order_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  std::uint64_t trained_token_count() const { return trained_token_count_; }

  // Log-probabilities of every vocabulary entry after `context`.
  LogitVector logits(std::span<const TokenId> context) const {
    const std::vector<TokenId> history = padded_history(context);
    const std::size_t vocab_size = vocab_.size();
    const double lambda_uniform = lambdas_.back();
    std::vector<double> probs(vocab_size, lambda_uniform / static_cast<double>(vocab_size));
    double norm = lambda_uniform;
    for (std::size_t i = order_; i >= 1; --i) {
      const double lambda = lambdas_[order_ - i];
      const ContextCounts* counts = lookup(history, i);
      if (counts == nullptr || lambda == 0.0) continue;
      const double weight = lambda / static_cast<double>(counts->total);
      for (const auto& [token, count] : counts->next) {
        probs[token] += weight * static_cast<double>(count);
      }
      norm += lambda;
    }
    LogitVector out(vocab_size);
    for (std::size_t v = 0; v < vocab_size; ++v) out[v] = std::log(probs[v] / norm);
    return out;
  }

  // Same value as logits(context)[next], bit for bit, in O(order log n).
  double log_prob(std::span<const TokenId> context, TokenId next) const {
    if (!vocab_.contains(next)) throw Error("invalid token id");
    const std::vector<TokenId> history = padded_history(context);
    const double lambda_uniform = lambdas_.back();
    double prob = lambda_uniform / static_cast<double>(vocab_.size());
    double norm = lambda_uniform;
    for (std::size_t i = order_; i >= 1; --i) {
      const double lambda = lambdas_[order_ - i];
      const ContextCounts* counts = lookup(history, i);
      if (counts == nullptr || lambda == 0.0) continue;
      const double weight = lambda / static_cast<double>(counts->total);
      auto it = std::lower_bound(
          counts->next.begin(), counts->next.end(), next,
          [](const auto& entry, TokenId id) { return entry.first < id; });
      if (it != counts->next.end() && it->first == next) {
        prob += weight * static_cast<double>(it->second);
      }
      norm += lambda;
    }
    return std::log(prob / norm);
  }

  double perplexity(std::span<const TokenId> ids) const {
    return logitsteer::perplexity(*this, ids);
  }

  nlohmann::json to_json() const {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [context, entry] : counts_) {
      nlohmann::json nexts = nlohmann::json::object();
      for (const auto& [token, count] : entry.next) nexts[std::to_string(token)] = count;
      counts[detail::context_key(context)] = std::move(nexts);
    }
    return nlohmann::json{
        {"version", kFormatVersion},
        {"order", order_},
        {"lambda", lambdas_},
        {"vocab", {{"tokens", vocab_.tokens()}}},
        {"counts", std::move(counts)},
        {"trained_token_count", trained_token_count_},
    };
  }

  static NGramModel from_json(const nlohmann::json& j) {
    try {
      if (!j.is_object()) throw ParseError("model file is not a JSON object");
      const auto& version = j.at("version");
      if (!version.is_number_integer() || version.get<std::int64_t>() != kFormatVersion) {
        throw ParseError("unsupported version");
      }
      const auto& order_json = j.at("order");
      if (!order_json.is_number_unsigned() || order_json.get<std::uint64_t>() == 0) {
        throw ParseError("order must be a positive integer");
      }
      const auto order = order_json.get<std::size_t>();
      auto lambdas = j.at("lambda").get<std::vector<double>>();
      try {
        detail::validate_lambdas(order, lambdas);
      } catch (const Error& e) {
        throw ParseError(e.what());
      }
      auto tokens = j.at("vocab").at("tokens").get<std::vector<std::string>>();
      Vocabulary vocab = [&] {
        try {
          return Vocabulary(std::move(tokens));
        } catch (const Error& e) {
          throw ParseError(e.what());
        }
      }();
      NGramModel model(std::move(vocab), order, std::move(lambdas));
      const auto& counts = j.at("counts");
      if (!counts.is_object()) throw ParseError("counts must be an object");
      const std::size_t vocab_size = model.vocab_.size();
      for (const auto& [key, nexts] : counts.items()) {
        std::vector<TokenId> context = detail::parse_context_key(key, vocab_size);
        if (context.size() + 1 > order) throw ParseError("context longer than order - 1");
        if (!nexts.is_object() || nexts.empty()) {
          throw ParseError("counts entry must be a non-empty object");
        }
        ContextCounts entry;
        for (const auto& [token_key, count] : nexts.items()) {
          if (!count.is_number_unsigned() || count.get<std::uint64_t>() == 0) {
            throw ParseError("counts must be positive integers");
          }
          entry.next.emplace_back(detail::parse_token_id(token_key, vocab_size),
                                  count.get<std::uint64_t>());
        }
        // Object keys sort as strings ("10" < "9"); restore numeric order.
        std::sort(entry.next.begin(), entry.next.end());
        for (const auto& e : entry.next) entry.total += e.second;
        model.counts_.emplace(std::move(context), std::move(entry));
      }
      if (model.counts_.find(std::vector<TokenId>{}) == model.counts_.end()) {
        throw ParseError("model has no unigram counts");
      }
      const auto& trained = j.at("trained_token_count");
      if (!trained.is_number_unsigned()) {
        throw ParseError("trained_token_count must be a non-negative integer");
      }
      model.trained_token_count_ = trained.get<std::uint64_t>();
      return model;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed model file: ") + e.what());
    }
  }

  void save(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json().dump() + "\n");
  }

  static NGramModel load(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("parse error in " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

 private:
  struct ContextCounts {
    std::vector<std::pair<TokenId, std::uint64_t>> next;
    std::uint64_t total = 0;
  };

  NGramModel(Vocabulary vocab, std::size_t order, std::vector<double> lambdas)
      : vocab_(std::move(vocab)), order_(order), lambdas_(std::move(lambdas)) {}

  // Last order-1 tokens of BOS^(order-1) + context.
  std::vector<TokenId> padded_history(std::span<const TokenId> context) const {
    for (TokenId id : context) {
      if (!vocab_.contains(id)) throw Error("invalid token id");
    }
    const std::size_t width = order_ - 1;
    std::vector<TokenId> history(width, Vocabulary::kBos);
    const std::size_t take = std::min(width, context.size());
    std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
              history.end() - static_cast<std::ptrdiff_t>(take));
    return history;
  }

  // Counts for the order-`i` context (last i-1 history tokens), if seen.
  const ContextCounts* lookup(const std::vector<TokenId>& history, std::size_t i) const {
    const std::span<const TokenId> context(history.data() + history.size() - (i - 1), i - 1);
    auto it = counts_.find(context);
    return it == counts_.end() ? nullptr : &it->second;
  }

  Vocabulary vocab_;
  std::size_t order_ = 1;
  std::vector<double> lambdas_;
  std::map<std::vector<TokenId>, ContextCounts, detail::ContextLess> counts_;
  std::uint64_t trained_token_count_ = 0;
};

static_assert(LanguageModel<NGramModel>);

}  // namespace logitsteer

#endif  // LOGITSTEER_NGRAM_LM_HPP_
