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

// Command-line front end. Kept in a header so tests can drive it in-process.

#ifndef LOGITSTEER_TOOLS_LOGITSTEER_CLI_HPP_
#define LOGITSTEER_TOOLS_LOGITSTEER_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "logitsteer/decoding.hpp"
#include "logitsteer/error.hpp"
#include "logitsteer/io.hpp"
#include "logitsteer/metrics.hpp"
#include "logitsteer/ngram_lm.hpp"
#include "logitsteer/pipeline.hpp"
#include "logitsteer/records_io.hpp"
#include "logitsteer/synthetic.hpp"
#include "logitsteer/vocab.hpp"

namespace logitsteer::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;

inline const std::map<std::string, RunMode>& mode_names() {
  static const std::map<std::string, RunMode> names{
      {"full", RunMode::kFull},
      {"anti-only", RunMode::kAntiOnly},
      {"expert-only", RunMode::kExpertOnly},
      {"base-only", RunMode::kBaseOnly},
      {"partial", RunMode::kPartial},
  };
  return names;
}

// Flags shared by every command that decodes.
struct DecodeFlags {
  std::string base;
  std::vector<std::string> experts;
  std::vector<std::string> anti_experts;
  std::string prompts;
  std::string mode = "full";
  std::size_t partial_k = 100;
  double top_p = 0.9;
  std::optional<std::size_t> top_k;
  double temperature = 1.0;
  std::size_t num_samples = 25;
  std::size_t max_len = 20;
  std::uint64_t seed = 0;
  bool fixed_length = false;
  unsigned threads = 0;

  void add_to(CLI::App* cmd, bool with_experts) {
    cmd->add_option("--base", base, "Base model file")->required()->check(CLI::ExistingFile);
    if (with_experts) {
      cmd->add_option("--expert", experts, "Expert model file (repeatable)")
          ->check(CLI::ExistingFile);
      cmd->add_option("--anti-expert", anti_experts, "Anti-expert model file (repeatable)")
          ->check(CLI::ExistingFile);
    }
    cmd->add_option("--prompts", prompts, "Prompts JSONL")->required()->check(CLI::ExistingFile);
    std::vector<std::string> choices;
    for (const auto& [name, unused] : mode_names()) choices.push_back(name);
    cmd->add_option("--mode", mode, "Steering mode")->check(CLI::IsMember(choices))
        ->capture_default_str();
    cmd->add_option("--partial-k", partial_k, "Visible base logits in partial mode")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--top-p", top_p, "Nucleus mass of the base model")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    cmd->add_option("--top-k", top_k, "Use top-k truncation instead of top-p")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--temperature", temperature)->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--num-samples", num_samples, "Continuations per prompt")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--max-len", max_len, "Maximum continuation length")
        ->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_flag("--fixed-length", fixed_length,
                  "Never stop at end-of-sequence; always emit max-len tokens");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
  }

  RunMode run_mode() const { return mode_names().at(mode); }

  GenerationConfig generation() const {
    GenerationConfig gen;
    gen.num_samples = num_samples;
    gen.max_len = max_len;
    gen.truncation = top_k ? TruncationConfig::top_k(*top_k) : TruncationConfig::top_p(top_p);
    gen.temperature = temperature;
    gen.seed = seed;
    gen.stop_at_eos = !fixed_length;
    return configure_generation(run_mode(), gen, partial_k);
  }

  std::vector<std::string> prompt_texts() const {
    std::vector<std::string> out;
    for (PromptRecord& record : read_prompts(prompts)) out.push_back(std::move(record.prompt));
    return out;
  }
};

struct LoadedModels {
  NGramModel base;
  std::vector<NGramModel> experts;
  std::vector<NGramModel> anti_experts;

  std::vector<const NGramModel*> expert_ptrs() const { return pointers(experts); }
  std::vector<const NGramModel*> anti_expert_ptrs() const { return pointers(anti_experts); }

 private:
  static std::vector<const NGramModel*> pointers(const std::vector<NGramModel>& models) {
    std::vector<const NGramModel*> out;
    for (const NGramModel& m : models) out.push_back(&m);
    return out;
  }
};

inline LoadedModels load_models(const DecodeFlags& flags) {
  LoadedModels models{NGramModel::load(flags.base), {}, {}};
  for (const std::string& path : flags.experts) models.experts.push_back(NGramModel::load(path));
  for (const std::string& path : flags.anti_experts) {
    models.anti_experts.push_back(NGramModel::load(path));
  }
  for (const auto* group : {&models.experts, &models.anti_experts}) {
    for (const NGramModel& m : *group) {
      if (!(m.vocab() == models.base.vocab())) throw Error("vocabulary mismatch");
    }
  }
  return models;
}

struct ScoringFlags {
  std::string pos_lexicon;
  std::string neg_lexicon;
  std::string eval_model;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--pos-lexicon", pos_lexicon, "Lexicon of the scored attribute")
        ->required()->check(CLI::ExistingFile);
    cmd->add_option("--neg-lexicon", neg_lexicon, "Lexicon of the opposite attribute")
        ->required()->check(CLI::ExistingFile);
    cmd->add_option("--eval-model", eval_model, "Held-out model for fluency perplexity")
        ->required()->check(CLI::ExistingFile);
  }

  AttributeScorer scorer() const {
    return AttributeScorer(read_lines(pos_lexicon), read_lines(neg_lexicon));
  }
};

inline std::vector<std::string> read_corpus(const std::string& path) { return read_lines(path); }

inline void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const std::string& w : warnings) err << "warning: " << w << "\n";
}

inline std::string lines_to_text(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& line : lines) {
    out += line;
    out.push_back('\n');
  }
  return out;
}

// Runs one invocation. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Steer n-gram language models with experts and anti-experts at decoding time"};
  app.require_subcommand(1);
  std::vector<std::string> warnings;
  std::function<void()> action;

  // train-lm
  struct {
    std::string corpus, out, vocab_model;
    std::vector<std::string> vocab_corpora;
    std::size_t order = 3;
    std::vector<double> lambdas;
    std::optional<std::uint64_t> max_tokens;
    std::size_t min_count = 1;
  } train;
  auto* train_cmd = app.add_subcommand("train-lm", "Train an interpolated n-gram model");
  train_cmd->add_option("--corpus", train.corpus, "One document per line")->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--order", train.order)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--lambdas", train.lambdas,
                        "Interpolation weights, highest order first, uniform last")
      ->delimiter(',');
  train_cmd->add_option("--max-tokens", train.max_tokens, "Train on the first N corpus tokens");
  train_cmd->add_option("--min-count", train.min_count)->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--vocab-corpus", train.vocab_corpora,
                        "Build the vocabulary from these corpora instead (repeatable)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--vocab-model", train.vocab_model, "Reuse the vocabulary of a model")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Model file")->required();
  train_cmd->callback([&] {
    action = [&] {
      const std::vector<std::string> corpus = read_corpus(train.corpus);
      Vocabulary vocab;
      if (!train.vocab_model.empty()) {
        vocab = NGramModel::load(train.vocab_model).vocab();
      } else if (!train.vocab_corpora.empty()) {
        std::vector<std::string> docs;
        for (const std::string& path : train.vocab_corpora) {
          for (std::string& doc : read_corpus(path)) docs.push_back(std::move(doc));
        }
        vocab = build_vocab(docs, train.min_count);
      } else {
        vocab = build_vocab(corpus, train.min_count);
      }
      NGramOptions options;
      options.order = train.order;
      if (!train.lambdas.empty()) {
        options.lambdas = train.lambdas;
      } else if (train.order != 3) {
        throw Error("--lambdas is required when --order is not 3");
      }
      options.max_tokens = train.max_tokens;
      const NGramModel model = NGramModel::train(corpus, std::move(vocab), options);
      model.save(train.out);
      out << "trained_token_count=" << model.trained_token_count() << "\n";
    };
  });

  // make-prompts
  struct {
    std::string corpus, out;
    std::size_t min_len = 4, max_len = 10;
  } mp;
  auto* mp_cmd = app.add_subcommand("make-prompts", "Extract sentence-prefix prompts");
  mp_cmd->add_option("--corpus", mp.corpus)->required()->check(CLI::ExistingFile);
  mp_cmd->add_option("--min-len", mp.min_len)->capture_default_str();
  mp_cmd->add_option("--max-len", mp.max_len)->capture_default_str();
  mp_cmd->add_option("--out", mp.out, "Prompts JSONL")->required();
  mp_cmd->callback([&] {
    action = [&] {
      std::vector<PromptRecord> prompts;
      for (std::string& p : make_prompts(read_corpus(mp.corpus), mp.min_len, mp.max_len)) {
        prompts.push_back({std::move(p), std::nullopt});
      }
      write_file_atomic(mp.out, prompts_to_jsonl(prompts));
      out << "prompts=" << prompts.size() << "\n";
    };
  });

  // generate
  DecodeFlags gen_flags;
  double gen_alpha = 0.0;
  std::string gen_out;
  bool gen_audit = false;
  auto* gen_cmd = app.add_subcommand("generate", "Sample steered continuations");
  gen_flags.add_to(gen_cmd, true);
  gen_cmd->add_option("--alpha", gen_alpha, "Steering strength")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Generations JSONL")->required();
  gen_cmd->add_flag("--audit", gen_audit, "Also write per-step supports to <out>.audit.jsonl");
  gen_cmd->callback([&] {
    action = [&] {
      const LoadedModels models = load_models(gen_flags);
      const auto spec = make_ensemble(gen_flags.run_mode(), models.base, models.expert_ptrs(),
                                      models.anti_expert_ptrs(), gen_alpha);
      std::vector<AuditEntry> audit;
      const auto records = generate_records(spec, gen_flags.prompt_texts(),
                                            gen_flags.generation(), gen_flags.threads,
                                            gen_audit ? &audit : nullptr);
      write_file_atomic(gen_out, generations_to_jsonl(records));
      if (gen_audit) {
        std::string text;
        for (const AuditEntry& entry : audit) {
          text += nlohmann::json{{"prompt_index", entry.prompt_index},
                                 {"sample_index", entry.sample_index},
                                 {"step", entry.step.step},
                                 {"support", entry.step.support},
                                 {"token", entry.step.token}}
                      .dump();
          text.push_back('\n');
        }
        write_file_atomic(gen_out + ".audit.jsonl", text);
      }
      out << "prompts=" << records.size() << "\n";
    };
  });

  // evaluate
  std::string eval_generations, eval_out;
  double eval_alpha = 0.0;
  ScoringFlags eval_scoring;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score generations and report metrics");
  eval_cmd->add_option("--generations", eval_generations)->required()->check(CLI::ExistingFile);
  eval_scoring.add_to(eval_cmd);
  eval_cmd->add_option("--alpha", eval_alpha, "Alpha recorded in the report")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out,
                       "Directory for metrics.json, metrics.csv and scored.jsonl")
      ->required();
  eval_cmd->callback([&] {
    action = [&] {
      std::vector<GenerationRecord> records = read_generations(eval_generations);
      const AttributeScorer scorer = eval_scoring.scorer();
      const NGramModel eval_model = NGramModel::load(eval_scoring.eval_model);
      const MetricsReport report = evaluate_records(std::span<GenerationRecord>(records), scorer,
                                                    eval_model, eval_alpha, &warnings);
      fs::create_directories(eval_out);
      write_file_atomic(fs::path(eval_out) / "metrics.json", report.to_json().dump(2) + "\n");
      write_file_atomic(fs::path(eval_out) / "metrics.csv",
                        MetricsReport::csv_header() + "\n" + report.csv_row() + "\n");
      write_file_atomic(fs::path(eval_out) / "scored.jsonl", generations_to_jsonl(records));
      out << report.to_json().dump(2) << "\n";
    };
  });

  // bucket-prompts
  std::string bucket_generations, bucket_out;
  std::optional<std::size_t> bucket_k;
  auto* bucket_cmd = app.add_subcommand(
      "bucket-prompts", "Split prompts into neutral/positive/negative by scored base samples");
  bucket_cmd->add_option("--generations", bucket_generations, "Scored generations JSONL")
      ->required()->check(CLI::ExistingFile);
  bucket_cmd->add_option("--num-samples", bucket_k, "Expected k (default: from the file)");
  bucket_cmd->add_option("--out", bucket_out, "Directory for the three prompt files")
      ->required();
  bucket_cmd->callback([&] {
    action = [&] {
      const std::vector<GenerationRecord> records = read_generations(bucket_generations);
      const std::size_t k = bucket_k ? *bucket_k : check_consistent_k(records);
      const PromptBuckets buckets = bucket_prompts(records, k);
      fs::create_directories(bucket_out);
      auto write = [&](const char* name, const std::vector<std::size_t>& indices) {
        std::vector<PromptRecord> prompts;
        for (std::size_t i : indices) prompts.push_back({records[i].prompt, std::string(name)});
        write_file_atomic(fs::path(bucket_out) / (std::string(name) + ".jsonl"),
                          prompts_to_jsonl(prompts));
        out << name << "=" << prompts.size() << "\n";
      };
      write("neutral", buckets.neutral);
      write("positive", buckets.positive);
      write("negative", buckets.negative);
    };
  });

  // sweep-alpha
  DecodeFlags sa_flags;
  ScoringFlags sa_scoring;
  std::vector<double> sa_alphas;
  std::string sa_out;
  auto* sa_cmd = app.add_subcommand("sweep-alpha", "Generate and evaluate over an alpha grid");
  sa_flags.add_to(sa_cmd, true);
  sa_scoring.add_to(sa_cmd);
  sa_cmd->add_option("--alphas", sa_alphas, "Comma-separated grid, e.g. --alphas=-1,0,1")
      ->required()->delimiter(',');
  sa_cmd->add_option("--out", sa_out, "CSV file")->required();
  sa_cmd->callback([&] {
    action = [&] {
      const LoadedModels models = load_models(sa_flags);
      const AttributeScorer scorer = sa_scoring.scorer();
      const NGramModel eval_model = NGramModel::load(sa_scoring.eval_model);
      SweepInputs inputs{sa_flags.prompt_texts(), sa_flags.generation(), &scorer, &eval_model,
                         sa_flags.threads};
      const auto reports = sweep_alpha(sa_flags.run_mode(), models.base, models.expert_ptrs(),
                                       models.anti_expert_ptrs(), sa_alphas, inputs, &warnings);
      std::string csv = MetricsReport::csv_header() + "\n";
      for (const MetricsReport& r : reports) csv += r.csv_row() + "\n";
      write_file_atomic(sa_out, csv);
      out << csv;
    };
  });

  // sweep-dataset-size
  DecodeFlags ds_flags;
  ScoringFlags ds_scoring;
  std::string ds_expert_corpus, ds_anti_corpus, ds_out;
  std::size_t ds_order = 3;
  std::vector<double> ds_lambdas;
  std::vector<std::uint64_t> ds_budgets;
  double ds_scale = 0.01;
  double ds_alpha = 2.0;
  auto* ds_cmd = app.add_subcommand("sweep-dataset-size",
                                    "Retrain (anti-)experts on token budgets and evaluate each");
  ds_flags.add_to(ds_cmd, false);
  ds_scoring.add_to(ds_cmd);
  ds_cmd->add_option("--expert-corpus", ds_expert_corpus)->check(CLI::ExistingFile);
  ds_cmd->add_option("--anti-expert-corpus", ds_anti_corpus)->required()
      ->check(CLI::ExistingFile);
  ds_cmd->add_option("--order", ds_order)->check(CLI::PositiveNumber)->capture_default_str();
  ds_cmd->add_option("--lambdas", ds_lambdas)->delimiter(',');
  ds_cmd->add_option("--budgets", ds_budgets, "Token budgets (default: scaled 40960..10.24M)")
      ->delimiter(',');
  ds_cmd->add_option("--scale", ds_scale, "Multiplier for the default budgets")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ds_cmd->add_option("--alpha", ds_alpha)->capture_default_str();
  ds_cmd->add_option("--out", ds_out, "CSV file")->required();
  ds_cmd->callback([&] {
    action = [&] {
      const NGramModel base = NGramModel::load(ds_flags.base);
      const AttributeScorer scorer = ds_scoring.scorer();
      const NGramModel eval_model = NGramModel::load(ds_scoring.eval_model);
      NGramOptions options;
      options.order = ds_order;
      if (!ds_lambdas.empty()) {
        options.lambdas = ds_lambdas;
      } else if (ds_order != 3) {
        throw Error("--lambdas is required when --order is not 3");
      }
      const std::vector<std::uint64_t> budgets =
          ds_budgets.empty() ? default_token_budgets(ds_scale) : ds_budgets;
      std::optional<std::vector<std::string>> expert_corpus;
      if (!ds_expert_corpus.empty()) expert_corpus = read_corpus(ds_expert_corpus);
      SweepInputs inputs{ds_flags.prompt_texts(), ds_flags.generation(), &scorer, &eval_model,
                         ds_flags.threads};
      const DatasetSweepResult result = sweep_dataset_size(
          ds_flags.run_mode(), base, expert_corpus ? &*expert_corpus : nullptr,
          read_corpus(ds_anti_corpus), options, budgets, ds_alpha, inputs, &warnings);
      std::string csv = DatasetSweepRow::csv_header() + "\n";
      for (const DatasetSweepRow& row : result.rows) csv += row.csv_row() + "\n";
      write_file_atomic(ds_out, csv);
      out << csv;
    };
  });

  // synth
  std::string synth_out;
  SyntheticOptions synth_options;
  auto* synth_cmd = app.add_subcommand("synth", "Write a toy sentiment dataset");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_options.seed)->capture_default_str();
  synth_cmd->add_option("--num-prompts", synth_options.num_prompts)->capture_default_str();
  synth_cmd->callback([&] {
    action = [&] {
      const SyntheticCorpus corpus = make_synthetic_corpus(synth_options);
      fs::create_directories(synth_out);
      const fs::path dir(synth_out);
      write_file_atomic(dir / "positive.txt", lines_to_text(corpus.positive_docs));
      write_file_atomic(dir / "negative.txt", lines_to_text(corpus.negative_docs));
      write_file_atomic(dir / "union.txt", lines_to_text(corpus.union_docs));
      write_file_atomic(dir / "heldout.txt", lines_to_text(corpus.eval_docs));
      write_file_atomic(dir / "positive_lexicon.txt", lines_to_text(corpus.positive_lexicon));
      write_file_atomic(dir / "negative_lexicon.txt", lines_to_text(corpus.negative_lexicon));
      std::vector<PromptRecord> prompts;
      for (const std::string& p : corpus.prompts) prompts.push_back({p, std::nullopt});
      write_file_atomic(dir / "prompts.jsonl", prompts_to_jsonl(prompts));
      out << "wrote " << dir.string() << "\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }
  try {
    if (action) action();
    print_warnings(warnings, err);
    return kExitOk;
  } catch (const Error& e) {
    print_warnings(warnings, err);
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace logitsteer::cli

#endif  // LOGITSTEER_TOOLS_LOGITSTEER_CLI_HPP_
