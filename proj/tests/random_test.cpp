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

#include "logitsteer/random.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gtest/gtest.h"

namespace logitsteer {
namespace {

// Reference values from an independent Python transcription of
// splitmix64-seeded xoshiro256**.
TEST(RandomSource, MatchesReferenceStream) {
  RandomSource zero(0);
  EXPECT_EQ(zero.next_u64(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(zero.next_u64(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(zero.next_u64(), 0x1a5f849d4933e6e0ULL);
  EXPECT_EQ(zero.next_u64(), 0x6aa594f1262d2d2cULL);

  RandomSource answer(42);
  EXPECT_EQ(answer.next_u64(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(answer.next_u64(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(answer.next_u64(), 0xae17533239e499a1ULL);
  EXPECT_EQ(answer.next_u64(), 0xecb8ad4703b360a1ULL);
}

TEST(RandomSource, UniformMatchesReferenceAndStaysInRange) {
  RandomSource rng(42);
  EXPECT_DOUBLE_EQ(rng.uniform(), 0.08386297105988216);
  EXPECT_DOUBLE_EQ(rng.uniform(), 0.3789802506626686);
  EXPECT_DOUBLE_EQ(rng.uniform(), 0.6800434110281394);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RandomSource, SameSeedSameStream) {
  RandomSource a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(DeriveSeed, DistinctPerPromptAndSample) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 20; ++i) {
    for (std::uint64_t j = 0; j < 20; ++j) seeds.push_back(derive_seed(5, i, j));
  }
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
}

}  // namespace
}  // namespace logitsteer
