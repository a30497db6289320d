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

#include "logitsteer/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "logitsteer/error.hpp"
#include "logitsteer/io.hpp"
#include "logitsteer/records_io.hpp"
#include "logitsteer/synthetic.hpp"
#include "test_support.hpp"

namespace logitsteer {
namespace {

TEST(SplitSentences, EndMarksFollowedBySpace) {
  EXPECT_EQ(split_sentences("One two. Three? Four!! five"),
            (std::vector<std::string>{"One two.", " Three?", " Four!!", " five"}));
  EXPECT_EQ(split_sentences("v1.2 is out."), (std::vector<std::string>{"v1.2 is out."}));
  EXPECT_TRUE(split_sentences("").empty());
}

TEST(MakePrompts, FirstHalfWithinLengthBounds) {
  const std::vector<std::string> docs{
      "t1 t2 t3 t4 t5 t6 t7 t8 t9 t10 t11 t12 t13 t14 t15 t16",
      "s1 s2 s3 s4 s5 s6",
      "",
  };
  EXPECT_EQ(make_prompts(docs), (std::vector<std::string>{"t1 t2 t3 t4 t5 t6 t7 t8"}));
  const std::vector<std::string> two{"a b c d e f g h. i j k l m n o p q r"};
  EXPECT_EQ(make_prompts(two), (std::vector<std::string>{"a b c d", "i j k l m"}));
  EXPECT_EQ(make_prompts(std::vector<std::string>{""}).size(), 0u);
  EXPECT_THROW(make_prompts(docs, 5, 4), Error);
}

class SmallSetup : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticOptions options;
    options.num_fillers = 60;
    options.docs_per_class = 300;
    options.eval_docs = 100;
    options.num_prompts = 6;
    corpus_ = new SyntheticCorpus(make_synthetic_corpus(options));
    std::vector<std::string> everything = corpus_->union_docs;
    everything.insert(everything.end(), corpus_->eval_docs.begin(), corpus_->eval_docs.end());
    const Vocabulary vocab = build_vocab(everything);
    base_ = new NGramModel(NGramModel::train(corpus_->union_docs, vocab));
    expert_ = new NGramModel(NGramModel::train(corpus_->positive_docs, vocab));
    anti_ = new NGramModel(NGramModel::train(corpus_->negative_docs, vocab));
    eval_ = new NGramModel(NGramModel::train(corpus_->eval_docs, vocab));
    scorer_ = new AttributeScorer(corpus_->positive_lexicon, corpus_->negative_lexicon);
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete base_;
    delete expert_;
    delete anti_;
    delete eval_;
    delete scorer_;
  }

  static GenerationConfig SmallGen() {
    GenerationConfig gen;
    gen.num_samples = 5;
    gen.max_len = 10;
    gen.seed = 3;
    return gen;
  }

  SweepInputs Inputs() const {
    return SweepInputs{corpus_->prompts, SmallGen(), scorer_, eval_, 1};
  }

  static inline SyntheticCorpus* corpus_ = nullptr;
  static inline NGramModel* base_ = nullptr;
  static inline NGramModel* expert_ = nullptr;
  static inline NGramModel* anti_ = nullptr;
  static inline NGramModel* eval_ = nullptr;
  static inline AttributeScorer* scorer_ = nullptr;
};

TEST_F(SmallSetup, ThreadCountDoesNotChangeOutput) {
  const auto spec = make_ensemble<NGramModel>(RunMode::kFull, *base_, {expert_}, {anti_}, 2.0);
  std::vector<AuditEntry> audit1, audit4;
  const auto one = generate_records(spec, corpus_->prompts, SmallGen(), 1, &audit1);
  const auto four = generate_records(spec, corpus_->prompts, SmallGen(), 4, &audit4);
  EXPECT_EQ(generations_to_jsonl(one), generations_to_jsonl(four));
  ASSERT_EQ(audit1.size(), audit4.size());
  for (std::size_t i = 0; i < audit1.size(); ++i) {
    EXPECT_EQ(audit1[i].prompt_index, audit4[i].prompt_index);
    EXPECT_EQ(audit1[i].step.token, audit4[i].step.token);
  }
  ASSERT_EQ(one.size(), corpus_->prompts.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].prompt, corpus_->prompts[i]);
    EXPECT_EQ(one[i].continuations.size(), 5u);
  }
}

TEST_F(SmallSetup, EmptyPromptIsRejected) {
  const auto spec = make_ensemble<NGramModel>(RunMode::kBaseOnly, *base_, {}, {}, 0.0);
  const std::vector<std::string> prompts{"hello", " , "};
  const std::vector<std::string> blank{"  "};
  EXPECT_NO_THROW(generate_records(spec, prompts, SmallGen(), 1));
  EXPECT_THROW(generate_records(spec, blank, SmallGen(), 1), Error);
}

TEST_F(SmallSetup, ModesBuildExpectedEnsembles) {
  const auto expert_only =
      make_ensemble<NGramModel>(RunMode::kExpertOnly, *base_, {expert_}, {anti_}, 3.0);
  EXPECT_EQ(&expert_only.base.get(), expert_);
  EXPECT_EQ(expert_only.mode, SteeringMode::kNone);
  const auto anti_only =
      make_ensemble<NGramModel>(RunMode::kAntiOnly, *base_, {expert_}, {anti_}, 3.0);
  EXPECT_TRUE(anti_only.experts.empty());
  EXPECT_EQ(anti_only.mode, SteeringMode::kAntiOnly);
  EXPECT_THROW(make_ensemble<NGramModel>(RunMode::kAntiOnly, *base_, {expert_}, {}, 1.0), Error);
  EXPECT_EQ(configure_generation(RunMode::kPartial, {}).partial_k, 100u);
  EXPECT_FALSE(configure_generation(RunMode::kFull, {}).partial_k.has_value());
}

TEST_F(SmallSetup, ExpertOnlySamplesFromExpert) {
  const auto spec =
      make_ensemble<NGramModel>(RunMode::kExpertOnly, *base_, {expert_}, {anti_}, 0.0);
  const auto ids = encode(base_->vocab(), corpus_->prompts[0]);
  const auto p = next_token_distribution(spec, ids, GenerationConfig{});
  const auto expected = softmax(truncate(
      expert_->logits(ids), nucleus_set(softmax(expert_->logits(ids)), TruncationConfig::top_p(0.9))));
  for (std::size_t v = 0; v < p.size(); ++v) EXPECT_NEAR(p[v], expected[v], 1e-12);
}

TEST_F(SmallSetup, SweepAtZeroMatchesBaseOnlyEvaluation) {
  const std::vector<double> grid{0.0};
  const auto rows = sweep_alpha(RunMode::kFull, *base_, {expert_}, {anti_}, grid, Inputs());
  ASSERT_EQ(rows.size(), 1u);
  const auto spec = make_ensemble<NGramModel>(RunMode::kBaseOnly, *base_, {}, {}, 0.0);
  auto records = generate_records(spec, corpus_->prompts, SmallGen(), 1);
  const auto direct =
      evaluate_records(std::span<GenerationRecord>(records), *scorer_, *eval_, 0.0);
  EXPECT_EQ(rows[0].csv_row(), direct.csv_row());
}

TEST_F(SmallSetup, SweepKeepsGridOrderAndNamesFailures) {
  const std::vector<double> grid{1.0, -1.0, 0.5};
  const auto rows = sweep_alpha(RunMode::kFull, *base_, {expert_}, {anti_}, grid, Inputs());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].alpha, -1.0);
  const std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
  try {
    sweep_alpha(RunMode::kFull, *base_, {expert_}, {anti_}, bad, Inputs());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("alpha=inf", 0), 0u) << e.what();
  }
  EXPECT_THROW(sweep_alpha(RunMode::kFull, *base_, {expert_}, {anti_}, std::vector<double>{}, Inputs()),
               Error);
}

TEST_F(SmallSetup, OversizedBudgetEqualsFullCorpus) {
  std::uint64_t total = 0;
  for (const auto& doc : corpus_->negative_docs) total += encode(base_->vocab(), doc).size();
  const std::vector<std::uint64_t> budgets{total, total * 10};
  std::vector<std::string> warnings;
  const auto result = sweep_dataset_size(RunMode::kAntiOnly, *base_, nullptr,
                                         corpus_->negative_docs, NGramOptions{}, budgets, 2.0,
                                         Inputs(), &warnings);
  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_EQ(result.rows[0].trained_tokens, total);
  EXPECT_EQ(result.rows[1].trained_tokens, total);
  EXPECT_EQ(result.rows[0].report.csv_row(), result.rows[1].report.csv_row());
  EXPECT_EQ(std::count_if(warnings.begin(), warnings.end(),
                          [](const std::string& w) { return w.find("exceeds") != std::string::npos; }),
            1);

  // And it matches steering with the anti-expert trained on everything.
  const std::vector<double> grid{2.0};
  const auto direct = sweep_alpha(RunMode::kAntiOnly, *base_, {}, {anti_}, grid, Inputs());
  EXPECT_EQ(result.rows[0].report.csv_row(), direct[0].csv_row());
  EXPECT_EQ(result.rows[0].effect,
            result.baseline.avg_max_attribute - direct[0].avg_max_attribute);
}

TEST(DefaultTokenBudgets, ScaledValues) {
  EXPECT_EQ(default_token_budgets(1.0),
            (std::vector<std::uint64_t>{40960, 204800, 1024000, 5120000, 10240000}));
  EXPECT_EQ(default_token_budgets(),
            (std::vector<std::uint64_t>{410, 2048, 10240, 51200, 102400}));
  EXPECT_EQ(default_token_budgets(1e-9).front(), 1u);
  EXPECT_THROW(default_token_budgets(0.0), Error);
}

TEST(EvaluateRecords, ConsistencyErrors) {
  EXPECT_THROW(check_consistent_k(std::vector<GenerationRecord>{}), Error);
  std::vector<GenerationRecord> records(3);
  for (auto& r : records) r.continuations = {"a", "b"};
  records[2].continuations.push_back("c");
  try {
    check_consistent_k(records);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("prompt 2"), std::string::npos) << e.what();
  }
}

TEST(RecordsIo, RoundTripAndLineNumbers) {
  const auto dir = testing::scratch_dir("records_io");
  std::vector<GenerationRecord> records(2);
  records[0] = {"p one", {"x y", "z"}, {0.5, 0.75}};
  records[1] = {"p \"two\"", {"", "w"}, {}};
  write_file_atomic(dir / "g.jsonl", generations_to_jsonl(records));
  const auto back = read_generations(dir / "g.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].scores, records[0].scores);
  EXPECT_EQ(back[1].prompt, records[1].prompt);
  EXPECT_EQ(back[1].continuations, records[1].continuations);

  write_file_atomic(dir / "bad.jsonl",
                    "{\"prompt\":\"a\",\"continuations\":[\"b\"]}\n{\"prompt\":1}\n");
  try {
    read_generations(dir / "bad.jsonl");
    FAIL() << "expected an error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:2:"), std::string::npos) << e.what();
  }
  write_file_atomic(dir / "p.jsonl", "{\"prompt\":\"hi\"}\r\n\n{\"prompt\":\"yo\"}\n");
  const auto prompts = read_prompts(dir / "p.jsonl");
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_EQ(prompts[1].prompt, "yo");
}

TEST(Synthetic, LexiconsAndDeterminism) {
  SyntheticOptions options;
  options.docs_per_class = 50;
  options.eval_docs = 10;
  const auto a = make_synthetic_corpus(options);
  const auto b = make_synthetic_corpus(options);
  EXPECT_EQ(a.positive_docs, b.positive_docs);
  EXPECT_EQ(a.prompts, b.prompts);
  EXPECT_EQ(a.positive_lexicon.size(), 50u);
  EXPECT_EQ(a.negative_lexicon.size(), 50u);
  for (const auto& w : a.positive_lexicon) {
    EXPECT_EQ(std::count(a.negative_lexicon.begin(), a.negative_lexicon.end(), w), 0);
  }
  EXPECT_EQ(a.prompts.size(), options.num_prompts);
}

}  // namespace
}  // namespace logitsteer
