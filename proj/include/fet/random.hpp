/**
 * Copyright 2026 The fedtrees Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace fet {

// Stream tags used when deriving child seeds. Every random decision in a
// session is drawn from a stream whose seed is a pure function of the
// session seed and one of these tags, so runs replay exactly.
enum class Stream : std::uint64_t {
  kClient = 1,
  kMasterTree = 2,
  kSubsample = 3,
  kRange = 4,
  kPermanent = 5,
  kInstant = 6,
  kLaplace = 7,
  kSplit = 8,
  kShard = 9,
  kSession = 10,
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

inline std::uint64_t derive_seed(std::uint64_t base, Stream tag, std::uint64_t index = 0) {
  return derive_seed(base, {static_cast<std::uint64_t>(tag), index});
}

/// Seeded random stream. Integer and real draws are computed from the raw
/// mt19937_64 output (whose sequence the standard fixes), so they replay
/// identically across standard libraries. binomial() defers to the standard
/// library and is only reproducible within one toolchain.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // [0, 1)
  double uniform();
  // (0, 1)
  double uniform_open();
  // Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t binomial(std::uint64_t trials, double p);
  double laplace(double scale);

  // First k entries of a partial Fisher-Yates shuffle of 0..n-1.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  template <class It>
  void shuffle(It first, It last) {
    auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::uint64_t j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fet
