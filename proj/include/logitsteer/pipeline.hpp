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

// Experiment orchestration: prompt extraction, batched generation, evaluation
// and the two sweeps (steering strength and anti-expert training budget).
// The command-line tool is a thin layer over these functions.

#ifndef LOGITSTEER_PIPELINE_HPP_
#define LOGITSTEER_PIPELINE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "logitsteer/decoding.hpp"
#include "logitsteer/ensemble.hpp"
#include "logitsteer/error.hpp"
#include "logitsteer/metrics.hpp"
#include "logitsteer/ngram_lm.hpp"
#include "logitsteer/random.hpp"
#include "logitsteer/vocab.hpp"

namespace logitsteer {

// ---------------------------------------------------------------------------
// Prompts

// Sentences end at a run of '.', '?' or '!' followed by whitespace or the end
// of the document.
inline std::vector<std::string> split_sentences(std::string_view doc) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  std::size_t pos = 0;
  auto is_end_mark = [](char c) { return c == '.' || c == '?' || c == '!'; };
  while (pos < doc.size()) {
    if (!is_end_mark(doc[pos])) {
      ++pos;
      continue;
    }
    while (pos < doc.size() && is_end_mark(doc[pos])) ++pos;
    if (pos == doc.size() || detail::whitespace_length(doc, pos) != 0) {
      sentences.emplace_back(doc.substr(start, pos - start));
      start = pos;
    }
  }
  if (start < doc.size()) sentences.emplace_back(doc.substr(start));
  return sentences;
}

// The first half (rounded down) of each sentence's tokens, kept when its
// length lies in [min_len, max_len]. Input order is preserved.
inline std::vector<std::string> make_prompts(std::span<const std::string> docs,
                                             std::size_t min_len = 4, std::size_t max_len = 10) {
  if (min_len > max_len) throw Error("min_len exceeds max_len");
  std::vector<std::string> prompts;
  for (const std::string& doc : docs) {
    for (const std::string& sentence : split_sentences(doc)) {
      const std::vector<std::string> tokens = tokenize(sentence);
      const std::size_t half = tokens.size() / 2;
      if (half < min_len || half > max_len) continue;
      std::string prompt;
      for (std::size_t i = 0; i < half; ++i) {
        if (i > 0) prompt.push_back(' ');
        prompt += tokens[i];
      }
      prompts.push_back(std::move(prompt));
    }
  }
  return prompts;
}

// ---------------------------------------------------------------------------
// Ensembles

enum class RunMode {
  kFull,        // expert(s) and/or anti-expert(s)
  kAntiOnly,    // base is its own expert
  kExpertOnly,  // sample from the first expert alone
  kBaseOnly,    // sample from the base alone
  kPartial,     // full steering with only the top-K base logits visible
};

template <LanguageModel M>
EnsembleSpec<M> make_ensemble(RunMode mode, const M& base, const std::vector<const M*>& experts,
                              const std::vector<const M*>& anti_experts, double alpha) {
  auto refs = [](const std::vector<const M*>& models) {
    std::vector<std::reference_wrapper<const M>> out;
    for (const M* model : models) out.push_back(std::cref(*model));
    return out;
  };
  switch (mode) {
    case RunMode::kFull:
    case RunMode::kPartial:
      return EnsembleSpec<M>{std::cref(base), refs(experts), refs(anti_experts), alpha,
                             SteeringMode::kFull};
    case RunMode::kAntiOnly:
      if (anti_experts.empty()) throw Error("anti-only mode needs an anti-expert");
      return EnsembleSpec<M>{std::cref(base), {}, refs(anti_experts), alpha,
                             SteeringMode::kAntiOnly};
    case RunMode::kExpertOnly:
      if (experts.empty()) throw Error("expert-only mode needs an expert");
      if (!(experts.front()->vocab() == base.vocab())) throw Error("vocabulary mismatch");
      return EnsembleSpec<M>{std::cref(*experts.front()), {}, {}, 0.0, SteeringMode::kNone};
    case RunMode::kBaseOnly:
      break;
  }
  return EnsembleSpec<M>{std::cref(base), {}, {}, 0.0, SteeringMode::kNone};
}

// Partial mode exposes only the top `partial_k` base logits unless the config
// already sets a limit.
inline GenerationConfig configure_generation(RunMode mode, GenerationConfig gen,
                                             std::size_t partial_k = 100) {
  if (mode == RunMode::kPartial && !gen.partial_k) gen.partial_k = partial_k;
  return gen;
}

// ---------------------------------------------------------------------------
// Generation

struct AuditEntry {
  std::size_t prompt_index = 0;
  std::size_t sample_index = 0;
  StepRecord step;
};

namespace detail {

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware
// concurrency). The first exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// gen.num_samples continuations per prompt. Sample j of prompt i draws from
// RandomSource(derive_seed(gen.seed, i, j)), so output does not depend on the
// thread count.
template <LanguageModel M>
std::vector<GenerationRecord> generate_records(const EnsembleSpec<M>& spec,
                                               std::span<const std::string> prompts,
                                               const GenerationConfig& gen, unsigned threads = 0,
                                               std::vector<AuditEntry>* audit = nullptr) {
  spec.validate();
  gen.validate();
  const Vocabulary& vocab = spec.base.get().vocab();
  std::vector<std::vector<TokenId>> encoded;
  encoded.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    encoded.push_back(encode(vocab, prompts[i]));
    if (encoded.back().empty()) {
      throw Error("prompt " + std::to_string(i) + " is empty after tokenization");
    }
  }
  std::vector<GenerationRecord> records(prompts.size());
  std::vector<std::vector<AuditEntry>> audits(audit != nullptr ? prompts.size() : 0);
  detail::parallel_for(prompts.size(), threads, [&](std::size_t i) {
    GenerationRecord& record = records[i];
    record.prompt = prompts[i];
    record.continuations.reserve(gen.num_samples);
    for (std::size_t j = 0; j < gen.num_samples; ++j) {
      RandomSource rng(derive_seed(gen.seed, i, j));
      StepObserver observer;
      if (audit != nullptr) {
        observer = [&audits, i, j](const StepRecord& step) {
          audits[i].push_back(AuditEntry{i, j, step});
        };
      }
      const std::vector<TokenId> ids = generate(spec, encoded[i], gen, rng, observer);
      record.continuations.push_back(decode(vocab, ids));
    }
  });
  if (audit != nullptr) {
    for (auto& entries : audits) {
      for (auto& entry : entries) audit->push_back(std::move(entry));
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Evaluation

// Every record must carry the same number of continuations as the first.
inline std::size_t check_consistent_k(std::span<const GenerationRecord> records) {
  if (records.empty()) throw Error("no generation records");
  const std::size_t k = records.front().continuations.size();
  if (k == 0) throw Error("prompt 0 has no continuations");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].continuations.size() != k) {
      throw Error("prompt " + std::to_string(i) + " has " +
                  std::to_string(records[i].continuations.size()) +
                  " continuations, expected " + std::to_string(k));
    }
  }
  return k;
}

// Scores `records` in place and summarizes them.
template <LanguageModel M>
MetricsReport evaluate_records(std::span<GenerationRecord> records, const AttributeScorer& scorer,
                               const M& eval_model, double alpha,
                               std::vector<std::string>* warnings = nullptr) {
  check_consistent_k(records);
  score_records(scorer, records);
  return compute_report(std::span<const GenerationRecord>(records), eval_model, alpha, warnings);
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepInputs {
  std::vector<std::string> prompts;
  GenerationConfig gen;
  const AttributeScorer* scorer = nullptr;
  const NGramModel* eval_model = nullptr;
  unsigned threads = 0;
};

// One report per alpha, in grid order.
inline std::vector<MetricsReport> sweep_alpha(RunMode mode, const NGramModel& base,
                                              const std::vector<const NGramModel*>& experts,
                                              const std::vector<const NGramModel*>& anti_experts,
                                              std::span<const double> alphas,
                                              const SweepInputs& inputs,
                                              std::vector<std::string>* warnings = nullptr) {
  if (alphas.empty()) throw Error("alpha grid is empty");
  if (inputs.scorer == nullptr || inputs.eval_model == nullptr) {
    throw Error("sweep needs a scorer and an evaluation model");
  }
  std::vector<MetricsReport> reports;
  for (double alpha : alphas) {
    try {
      const auto spec = make_ensemble(mode, base, experts, anti_experts, alpha);
      auto records = generate_records(spec, inputs.prompts, configure_generation(mode, inputs.gen),
                                      inputs.threads);
      reports.push_back(
          evaluate_records(std::span<GenerationRecord>(records), *inputs.scorer,
                           *inputs.eval_model, alpha, warnings));
    } catch (const Error& e) {
      throw Error("alpha=" + format_double(alpha) + ": " + e.what());
    }
  }
  return reports;
}

// The token budgets 40,960 / 204.8K / 1.024M / 5.12M / 10.24M, multiplied by
// `scale` and rounded (never below 1).
inline std::vector<std::uint64_t> default_token_budgets(double scale = 0.01) {
  if (!(scale > 0.0)) throw Error("scale must be positive");
  std::vector<std::uint64_t> budgets;
  for (double full : {40960.0, 204800.0, 1024000.0, 5120000.0, 10240000.0}) {
    budgets.push_back(std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(full * scale))));
  }
  return budgets;
}

struct DatasetSweepRow {
  std::uint64_t budget = 0;
  std::uint64_t trained_tokens = 0;  // anti-expert tokens actually consumed
  double effect = 0.0;               // unsteered avg_max_attribute minus steered
  MetricsReport report;

  static std::string csv_header() {
    return "budget,trained_tokens,effect," + MetricsReport::csv_header();
  }
  std::string csv_row() const {
    return std::to_string(budget) + "," + std::to_string(trained_tokens) + "," +
           format_double(effect) + "," + report.csv_row();
  }
};

struct DatasetSweepResult {
  MetricsReport baseline;  // base model alone
  std::vector<DatasetSweepRow> rows;
};

// Retrains the anti-expert (and the expert, when a corpus is given) on the
// first `budget` tokens of its corpus for each budget, then generates and
// evaluates at `alpha`. All models use the base model's vocabulary.
inline DatasetSweepResult sweep_dataset_size(
    RunMode mode, const NGramModel& base, const std::vector<std::string>* expert_corpus,
    const std::vector<std::string>& anti_corpus, const NGramOptions& options,
    std::span<const std::uint64_t> budgets, double alpha, const SweepInputs& inputs,
    std::vector<std::string>* warnings = nullptr) {
  if (budgets.empty()) throw Error("budget list is empty");
  if (inputs.scorer == nullptr || inputs.eval_model == nullptr) {
    throw Error("sweep needs a scorer and an evaluation model");
  }
  if (mode == RunMode::kExpertOnly || mode == RunMode::kBaseOnly) {
    throw Error("dataset-size sweep needs a steering mode");
  }
  if (mode == RunMode::kAntiOnly) expert_corpus = nullptr;
  const Vocabulary& vocab = base.vocab();
  auto encode_all = [&](const std::vector<std::string>& docs) {
    std::vector<std::vector<TokenId>> out;
    std::uint64_t tokens = 0;
    for (const std::string& doc : docs) {
      out.push_back(encode(vocab, doc));
      tokens += out.back().size();
    }
    return std::pair{std::move(out), tokens};
  };
  const auto [anti_docs, anti_total] = encode_all(anti_corpus);
  std::vector<std::vector<TokenId>> expert_docs;
  std::uint64_t expert_total = 0;
  if (expert_corpus != nullptr) std::tie(expert_docs, expert_total) = encode_all(*expert_corpus);

  const GenerationConfig gen = configure_generation(mode, inputs.gen);
  DatasetSweepResult result;
  {
    const auto spec = make_ensemble<NGramModel>(RunMode::kBaseOnly, base, {}, {}, 0.0);
    auto records = generate_records(spec, inputs.prompts, gen, inputs.threads);
    result.baseline = evaluate_records(std::span<GenerationRecord>(records), *inputs.scorer,
                                       *inputs.eval_model, 0.0, warnings);
  }
  for (std::uint64_t budget : budgets) {
    try {
      if (budget == 0) throw Error("budgets must be positive");
      if (warnings != nullptr && (budget > anti_total || (expert_corpus && budget > expert_total))) {
        warnings->push_back("budget " + std::to_string(budget) +
                            " exceeds corpus size; using the full corpus");
      }
      NGramOptions budgeted = options;
      budgeted.max_tokens = budget;
      const NGramModel anti = NGramModel::train_encoded(anti_docs, vocab, budgeted);
      std::optional<NGramModel> expert;
      if (expert_corpus != nullptr) {
        expert = NGramModel::train_encoded(expert_docs, vocab, budgeted);
      }
      std::vector<const NGramModel*> experts;
      if (expert) experts.push_back(&*expert);
      const auto spec = make_ensemble(mode, base, experts, {&anti}, alpha);
      auto records = generate_records(spec, inputs.prompts, gen, inputs.threads);
      DatasetSweepRow row;
      row.budget = budget;
      row.trained_tokens = anti.trained_token_count();
      row.report = evaluate_records(std::span<GenerationRecord>(records), *inputs.scorer,
                                    *inputs.eval_model, alpha, warnings);
      row.effect = result.baseline.avg_max_attribute - row.report.avg_max_attribute;
      result.rows.push_back(row);
    } catch (const Error& e) {
      throw Error("budget=" + std::to_string(budget) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace logitsteer

#endif  // LOGITSTEER_PIPELINE_HPP_
