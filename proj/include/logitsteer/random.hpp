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

// Portable seeded randomness.
//
// The generator is xoshiro256** (Blackman & Vigna) with its 256-bit state
// filled from four successive splitmix64 outputs of the 64-bit seed. Uniform
// reals take the top 53 bits of a draw, so `uniform()` lies in [0, 1) and the
// sequence for a given seed is identical on every platform. Golden tests
// depend on this exact algorithm; do not swap it for std:: engines, whose
// distributions are implementation-defined.

#ifndef LOGITSTEER_RANDOM_HPP_
#define LOGITSTEER_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <limits>

namespace logitsteer {

// splitmix64 output function (finalizer) applied to `x`.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  return mix64(state);
}

// Seed for sample `sample_index` of prompt `prompt_index`:
//   seed XOR mix64(mix64(prompt_index + 1) + sample_index)
// Independent of scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t prompt_index,
                                    std::uint64_t sample_index) {
  return seed ^ mix64(mix64(prompt_index + 1) + sample_index);
}

class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace logitsteer

#endif  // LOGITSTEER_RANDOM_HPP_
