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

#include "logitsteer/ensemble.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "logitsteer/error.hpp"
#include "test_support.hpp"

namespace logitsteer {
namespace {

void ExpectNear(const ProbabilityVector& actual, const ProbabilityVector& expected, double tol) {
  ASSERT_EQ(actual.size(), expected.size());
  for (std::size_t v = 0; v < actual.size(); ++v) {
    EXPECT_NEAR(actual[v], expected[v], tol) << "at " << v;
  }
}

TEST(Combine, SingleExpertHandCase) {
  const LogitVector z{0, 0, 0};
  const std::vector<LogitVector> plus{{std::log(2.0), 0, 0}};
  ExpectNear(combine(z, plus, {}, 1.0), {0.5, 0.25, 0.25}, 1e-15);
}

TEST(Combine, AlphaZeroIsBaseSoftmax) {
  const LogitVector z{1.0, kMasked, -2.0, 0.5};
  const std::vector<LogitVector> plus{{9, 9, -9, 3}};
  const std::vector<LogitVector> minus{{-4, 0, 2, 1}};
  const auto p = combine(z, plus, minus, 0.0);
  ExpectNear(p, softmax(z), 0.0);
  EXPECT_EQ(p[1], 0.0);
}

TEST(Combine, CancellingExpertsAreNeutral) {
  const LogitVector z{0.3, -1.0, 2.0};
  const std::vector<LogitVector> same{{1.0, 5.0, -3.0}};
  ExpectNear(combine(z, same, same, 2.5), combine(z, {}, {}, 0.0), 1e-15);
}

TEST(Combine, TemperatureDividesSteeredLogits) {
  const LogitVector z{0.0, std::log(4.0)};
  // Log-odds of ln 4 become ln 2 at T = 2.
  ExpectNear(combine(z, {}, {}, 0.0, 2.0), {1.0 / 3.0, 2.0 / 3.0}, 1e-15);
}

TEST(Combine, Errors) {
  const LogitVector z{0.0, 0.0};
  const std::vector<LogitVector> short_expert{{0.0}};
  EXPECT_THROW(combine(z, short_expert, {}, 1.0), Error);
  EXPECT_THROW(combine(z, {}, short_expert, 1.0), Error);
  try {
    combine(LogitVector{kMasked, kMasked}, {}, {}, 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty support");
  }
  const std::vector<LogitVector> inf_expert{{kMasked, 0.0}};
  EXPECT_THROW(combine(z, inf_expert, {}, 1.0), Error);
  // An expert may be -inf where the base is masked.
  const LogitVector masked_base{kMasked, 0.0};
  ExpectNear(combine(masked_base, inf_expert, {}, 1.0), {0.0, 1.0}, 0.0);
  EXPECT_THROW(combine(z, {}, {}, 1.0, 0.0), Error);
  EXPECT_THROW(combine(z, {}, {}, std::nan("")), Error);
}

TEST(CombineAntiOnly, HandCase) {
  const LogitVector z{0.0, 0.0};
  const std::vector<LogitVector> minus{{std::log(4.0), 0.0}};
  ExpectNear(combine_anti_only(z, minus, 1.0), {0.2, 0.8}, 1e-15);
  ExpectNear(combine_anti_only(z, minus, 0.0), softmax(z), 0.0);
}

TEST(RatioForm, HandCases) {
  const ProbabilityVector p{0.5, 0.5};
  const ProbabilityVector plus{0.8, 0.2};
  const ProbabilityVector minus{0.4, 0.6};
  // 0.5 * (2)^2 = 2 and 0.5 * (1/3)^2 = 1/18, normalized: 36/37 and 1/37.
  const ProbabilityVector expected{36.0 / 37.0, 1.0 / 37.0};
  ExpectNear(ratio_form(p, plus, minus, 2.0), expected, 1e-15);
  const LogitVector z{std::log(0.5), std::log(0.5)};
  const std::vector<LogitVector> zp{{std::log(0.8), std::log(0.2)}};
  const std::vector<LogitVector> zm{{std::log(0.4), std::log(0.6)}};
  ExpectNear(combine(z, zp, zm, 2.0), expected, 1e-15);

  const ProbabilityVector base{0.2, 0.3, 0.5};
  const ProbabilityVector other{0.6, 0.1, 0.3};
  ExpectNear(ratio_form(base, other, other, 1.0), base, 1e-15);
  try {
    ratio_form(ProbabilityVector{1.0, 0.0}, plus, minus, 1.0);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "ratio form requires positive probabilities");
  }
}

// Random logit vectors with a few masked base entries.
class CombineProperty : public ::testing::Test {
 protected:
  std::mt19937_64 gen_{2024};

  LogitVector Logits(std::size_t n) { return testing::normal_logits(gen_, n, 3.0); }
  double Alpha() { return std::uniform_real_distribution<double>(-4.0, 4.0)(gen_); }
  std::size_t Size() { return std::uniform_int_distribution<std::size_t>(2, 64)(gen_); }
};

TEST_F(CombineProperty, ShiftInvariancePerModel) {
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = Size();
    LogitVector z = Logits(n);
    z[gen_() % n] = kMasked;
    const std::vector<LogitVector> plus{Logits(n), Logits(n)};
    const std::vector<LogitVector> minus{Logits(n)};
    const double alpha = Alpha();
    const auto reference = combine(z, plus, minus, alpha);
    std::normal_distribution<double> shift(0.0, 50.0);
    auto shifted = [&](LogitVector v) {
      const double c = shift(gen_);
      for (double& x : v) x += c;
      return v;
    };
    const std::vector<LogitVector> plus2{shifted(plus[0]), shifted(plus[1])};
    const std::vector<LogitVector> minus2{shifted(minus[0])};
    const auto moved = combine(shifted(z), plus2, minus2, alpha);
    for (std::size_t v = 0; v < n; ++v) ASSERT_NEAR(moved[v], reference[v], 1e-12);
  }
}

TEST_F(CombineProperty, LogOddsAffineInAlpha) {
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = Size();
    const LogitVector z = Logits(n);
    const std::vector<LogitVector> plus{Logits(n)};
    const std::vector<LogitVector> minus{Logits(n)};
    const double alpha = Alpha();
    const auto p = combine(z, plus, minus, alpha);
    const std::size_t i = gen_() % n;
    const std::size_t j = gen_() % n;
    const double expected =
        (z[i] - z[j]) + alpha * ((plus[0][i] - minus[0][i]) - (plus[0][j] - minus[0][j]));
    ASSERT_NEAR(std::log(p[i]) - std::log(p[j]), expected, 1e-9);
  }
}

TEST_F(CombineProperty, AntiOnlyEqualsGeneralFormWithBaseAsExpert) {
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = Size();
    LogitVector z = Logits(n);
    z[gen_() % n] = kMasked;
    const std::vector<LogitVector> minus{Logits(n), Logits(n)};
    const double alpha = Alpha();
    const std::vector<LogitVector> self{z};
    const auto anti = combine_anti_only(z, minus, alpha);
    const auto general = combine(z, self, minus, alpha);
    for (std::size_t v = 0; v < n; ++v) ASSERT_EQ(anti[v], general[v]);
  }
}

TEST_F(CombineProperty, NormalizedAndStableAtLargeMagnitudes) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = Size();
    LogitVector z = Logits(n);
    for (double& x : z) x *= 300.0;
    std::vector<LogitVector> plus{Logits(n)};
    for (double& x : plus[0]) x *= 300.0;
    const auto p = combine(z, plus, {}, Alpha());
    double sum = 0.0;
    for (double x : p) {
      ASSERT_TRUE(std::isfinite(x));
      ASSERT_GE(x, 0.0);
      sum += x;
    }
    ASSERT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST_F(CombineProperty, MaskedEntriesStayZero) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = Size();
    LogitVector z = Logits(n);
    std::vector<bool> masked(n);
    for (std::size_t v = 0; v < n; ++v) {
      masked[v] = v > 0 && gen_() % 3 == 0;
      if (masked[v]) z[v] = kMasked;
    }
    const std::vector<LogitVector> plus{Logits(n)};
    const auto p = combine(z, plus, {}, 100.0 * Alpha());
    for (std::size_t v = 0; v < n; ++v) {
      if (masked[v]) {
        ASSERT_EQ(p[v], 0.0);
      }
    }
  }
}

TEST(EnsembleSpec, ValidatesMembership) {
  const auto vocab = testing::make_vocab({"a"});
  const auto other = testing::make_vocab({"b"});
  const testing::ScriptedModel base(vocab, LogitVector(4, 0.0));
  const testing::ScriptedModel stranger(other, LogitVector(4, 0.0));
  using Spec = EnsembleSpec<testing::ScriptedModel>;
  EXPECT_NO_THROW((Spec{std::cref(base), {std::cref(base)}, {}, 1.0, SteeringMode::kFull}.validate()));
  EXPECT_THROW((Spec{std::cref(base), {}, {}, 1.0, SteeringMode::kFull}.validate()), Error);
  EXPECT_THROW((Spec{std::cref(base), {std::cref(base)}, {std::cref(base)}, 1.0,
                     SteeringMode::kAntiOnly}.validate()),
               Error);
  EXPECT_THROW((Spec{std::cref(base), {std::cref(base)}, {}, 0.0, SteeringMode::kNone}.validate()),
               Error);
  try {
    Spec{std::cref(base), {std::cref(stranger)}, {}, 1.0, SteeringMode::kFull}.validate();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "vocabulary mismatch");
  }
}

}  // namespace
}  // namespace logitsteer
