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

// Automatic evaluation of generated continuations: lexicon attribute scores,
// attribute statistics over k samples per prompt, fluency perplexity under a
// held-out evaluation model, and distinct-n diversity.

#ifndef LOGITSTEER_METRICS_HPP_
#define LOGITSTEER_METRICS_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "logitsteer/error.hpp"
#include "logitsteer/language_model.hpp"
#include "logitsteer/vocab.hpp"

namespace logitsteer {

// Add-one smoothed bag-of-words score: (n+ + 1) / (n+ + n- + 2), where n+ and
// n- count tokens found in the positive and negative lexicons. A text is
// labeled positive iff its score is strictly above 0.5.
class AttributeScorer {
 public:
  AttributeScorer(const std::vector<std::string>& positive,
                  const std::vector<std::string>& negative)
      : positive_(normalize(positive)), negative_(normalize(negative)) {
    if (positive_.empty() || negative_.empty()) throw Error("lexicons must be non-empty");
    for (const std::string& token : positive_) {
      if (negative_.count(token) != 0) {
        throw Error("lexicons must be disjoint; shared token '" + token + "'");
      }
    }
  }

  double score(std::string_view text) const {
    std::size_t hits_pos = 0;
    std::size_t hits_neg = 0;
    for (const std::string& token : tokenize(text)) {
      if (positive_.count(token) != 0) ++hits_pos;
      else if (negative_.count(token) != 0) ++hits_neg;
    }
    return static_cast<double>(hits_pos + 1) / static_cast<double>(hits_pos + hits_neg + 2);
  }

  static bool is_positive(double score) { return score > 0.5; }

 private:
  // Lexicon lines go through the tokenizer so "Great" and "great" match; a
  // line yielding no token (blank) is skipped.
  static std::unordered_set<std::string> normalize(const std::vector<std::string>& lines) {
    std::unordered_set<std::string> out;
    for (const std::string& line : lines) {
      for (std::string& token : tokenize(line)) out.insert(std::move(token));
    }
    return out;
  }

  std::unordered_set<std::string> positive_;
  std::unordered_set<std::string> negative_;
};

// One prompt with its k continuations. `scores` is empty until evaluated.
struct GenerationRecord {
  std::string prompt;
  std::vector<std::string> continuations;
  std::vector<double> scores;
};

struct MetricsReport {
  double alpha = 0.0;
  double avg_max_attribute = 0.0;
  double attribute_prob = 0.0;
  double percent_positive = 0.0;
  double fluency_ppl = 0.0;
  double dist1 = 0.0;
  double dist2 = 0.0;
  double dist3 = 0.0;
  std::size_t num_prompts = 0;

  nlohmann::ordered_json to_json() const {
    return nlohmann::ordered_json{
        {"alpha", alpha},
        {"avg_max_attribute", avg_max_attribute},
        {"attribute_prob", attribute_prob},
        {"percent_positive", percent_positive},
        {"fluency_ppl", fluency_ppl},
        {"dist1", dist1},
        {"dist2", dist2},
        {"dist3", dist3},
        {"num_prompts", num_prompts},
    };
  }

  static std::string csv_header() {
    return "alpha,avg_max_attribute,attribute_prob,percent_positive,fluency_ppl,dist1,dist2,"
           "dist3,num_prompts";
  }

  std::string csv_row() const;
};

// Shortest decimal text that reads back as the same double.
inline std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

inline std::string MetricsReport::csv_row() const {
  std::string row;
  for (double v : {alpha, avg_max_attribute, attribute_prob, percent_positive, fluency_ppl, dist1,
                   dist2, dist3}) {
    row += format_double(v);
    row.push_back(',');
  }
  row += std::to_string(num_prompts);
  return row;
}

namespace detail {

inline void require_records(std::span<const GenerationRecord> records) {
  if (records.empty()) throw Error("no generation records");
}

inline void require_scores(const GenerationRecord& record, std::size_t index) {
  if (record.scores.empty()) {
    throw Error("prompt " + std::to_string(index) + " has no scores");
  }
  if (record.scores.size() != record.continuations.size()) {
    throw Error("prompt " + std::to_string(index) +
                " has a different number of scores and continuations");
  }
}

}  // namespace detail

// Mean over prompts of (distinct n-grams in the pooled continuations) /
// (total tokens in the pooled continuations). N-grams never span two
// continuations. A prompt whose continuations hold no tokens contributes 0.
inline double dist_n(std::span<const GenerationRecord> records, std::size_t n,
                     std::vector<std::string>* warnings = nullptr) {
  if (n < 1) throw Error("n must be at least 1");
  detail::require_records(records);
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::set<std::vector<std::string>> distinct;
    std::size_t total_tokens = 0;
    for (const std::string& text : records[i].continuations) {
      const std::vector<std::string> tokens = tokenize(text);
      total_tokens += tokens.size();
      for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
        distinct.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                         tokens.begin() + static_cast<std::ptrdiff_t>(start + n));
      }
    }
    if (total_tokens == 0) {
      if (warnings != nullptr) {
        warnings->push_back("prompt " + std::to_string(i) + " has no continuation tokens");
      }
      continue;
    }
    sum += static_cast<double>(distinct.size()) / static_cast<double>(total_tokens);
  }
  return sum / static_cast<double>(records.size());
}

// Mean over prompts of the maximum score among that prompt's samples.
inline double avg_max_attribute(std::span<const GenerationRecord> records) {
  detail::require_records(records);
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    detail::require_scores(records[i], i);
    sum += *std::max_element(records[i].scores.begin(), records[i].scores.end());
  }
  return sum / static_cast<double>(records.size());
}

// Fraction of prompts with at least one sample scoring >= threshold.
inline double attribute_prob(std::span<const GenerationRecord> records, double threshold = 0.5) {
  detail::require_records(records);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    detail::require_scores(records[i], i);
    const auto& scores = records[i].scores;
    if (std::any_of(scores.begin(), scores.end(), [&](double s) { return s >= threshold; })) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

// Mean over prompts of the fraction of samples labeled positive (> 0.5).
inline double percent_positive(std::span<const GenerationRecord> records) {
  detail::require_records(records);
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    detail::require_scores(records[i], i);
    const auto& scores = records[i].scores;
    const auto positive = std::count_if(scores.begin(), scores.end(), AttributeScorer::is_positive);
    sum += static_cast<double>(positive) / static_cast<double>(scores.size());
  }
  return sum / static_cast<double>(records.size());
}

// Mean perplexity of every non-empty continuation under `eval_model`. Empty
// continuations are skipped and counted in one warning.
template <LanguageModel M>
double fluency_ppl(const M& eval_model, std::span<const GenerationRecord> records,
                   std::vector<std::string>* warnings = nullptr) {
  detail::require_records(records);
  double sum = 0.0;
  std::size_t counted = 0;
  std::size_t empty = 0;
  for (const GenerationRecord& record : records) {
    for (const std::string& text : record.continuations) {
      const std::vector<TokenId> ids = encode(eval_model.vocab(), text);
      if (ids.empty()) {
        ++empty;
        continue;
      }
      sum += perplexity(eval_model, ids);
      ++counted;
    }
  }
  if (counted == 0) throw Error("all continuations are empty");
  if (empty > 0 && warnings != nullptr) {
    warnings->push_back(std::to_string(empty) + " of " + std::to_string(empty + counted) +
                        " continuations are empty and were skipped for fluency");
  }
  return sum / static_cast<double>(counted);
}

// Prompt indices grouped by how many of the base model's k samples were
// labeled positive (c):
//   negative: c == 0
//   positive: c >= k - 1
//   neutral:  c in {floor(k/2), ceil(k/2)}
// Checked in that order, so the lists are disjoint even for tiny k.
struct PromptBuckets {
  std::vector<std::size_t> neutral;
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};

inline PromptBuckets bucket_prompts(std::span<const GenerationRecord> records, std::size_t k) {
  if (k < 1) throw Error("k must be positive");
  PromptBuckets buckets;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& scores = records[i].scores;
    if (scores.size() != k || records[i].continuations.size() != k) {
      throw Error("prompt " + std::to_string(i) + " does not have exactly " +
                  std::to_string(k) + " scored continuations");
    }
    const auto c = static_cast<std::size_t>(
        std::count_if(scores.begin(), scores.end(), AttributeScorer::is_positive));
    if (c == 0) {
      buckets.negative.push_back(i);
    } else if (c + 1 >= k) {
      buckets.positive.push_back(i);
    } else if (c == k / 2 || c == (k + 1) / 2) {
      buckets.neutral.push_back(i);
    }
  }
  return buckets;
}

// Scores every continuation in place.
inline void score_records(const AttributeScorer& scorer, std::span<GenerationRecord> records) {
  for (GenerationRecord& record : records) {
    record.scores.clear();
    for (const std::string& text : record.continuations) {
      record.scores.push_back(scorer.score(text));
    }
  }
}

// Full report over already-scored records.
template <LanguageModel M>
MetricsReport compute_report(std::span<const GenerationRecord> records, const M& eval_model,
                             double alpha, std::vector<std::string>* warnings = nullptr) {
  MetricsReport report;
  report.alpha = alpha;
  report.avg_max_attribute = avg_max_attribute(records);
  report.attribute_prob = attribute_prob(records);
  report.percent_positive = percent_positive(records);
  report.fluency_ppl = fluency_ppl(eval_model, records, warnings);
  report.dist1 = dist_n(records, 1, warnings);
  report.dist2 = dist_n(records, 2, warnings);
  report.dist3 = dist_n(records, 3, warnings);
  report.num_prompts = records.size();
  return report;
}

}  // namespace logitsteer

#endif  // LOGITSTEER_METRICS_HPP_
