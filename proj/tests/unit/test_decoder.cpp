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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fet/error.hpp"
#include "fet/ldp.hpp"

using namespace fet;

namespace {

// Bit sums whose bias-corrected values equal M c exactly.
BitCountVector expected_sums(const std::vector<double>& counts, const BloomParams& bloom, const RrParams& rr) {
  BitCountVector v = BitCountVector::zero(bloom.bits);
  double n = std::accumulate(counts.begin(), counts.end(), 0.0);
  v.n = static_cast<std::uint64_t>(n);
  std::vector<double> ones(bloom.bits, 0.0);
  for (std::size_t l = 0; l < counts.size(); ++l) {
    auto code = bloom_encode(static_cast<std::uint32_t>(l), bloom);
    for (std::size_t t = 0; t < bloom.bits; ++t) ones[t] += code[t] * counts[l];
  }
  for (std::size_t t = 0; t < bloom.bits; ++t) {
    double s = ones[t] * rr.q_eff() + (n - ones[t]) * rr.p_eff();
    REQUIRE(std::abs(s - std::round(s)) < 1e-9);
    v.sums[t] = static_cast<std::uint64_t>(std::llround(s));
  }
  return v;
}

}  // namespace

TEST_CASE("hand-worked two-class decode") {
  // Codes {1, 30} and {21, 29} are disjoint, so the unpenalised solution
  // is the mean corrected value over each code's bits. With n = 100,
  // sum = 37.5 + 0.25 y: y1 = 62, y30 = 38, y21 = y29 = 50, others +-2.
  BitCountVector v = BitCountVector::zero(32);
  v.n = 100;
  for (std::size_t t = 0; t < 32; ++t) v.sums[t] = t % 2 ? 38 : 37;
  v.sums[1] = 53;
  v.sums[30] = 47;
  v.sums[21] = 50;
  v.sums[29] = 50;
  CountDecoder d(BloomParams{}, RrParams{}, 2);
  auto exact = d.decode(v, 0.0);
  CHECK(exact.n == 100);
  CHECK(exact.counts[0] == doctest::Approx(50).epsilon(1e-9));
  CHECK(exact.counts[1] == doctest::Approx(50).epsilon(1e-9));
  // Soft threshold: (rho - lambda / 2) / ||M_l||^2 with rho = 100.
  auto penalised = d.decode(v, 1.0);
  CHECK(penalised.counts[0] == doctest::Approx(49.75).epsilon(1e-9));
  CHECK(penalised.counts[1] == doctest::Approx(49.75).epsilon(1e-9));
}

TEST_CASE("noiseless sums decode to the true counts") {
  BloomParams bloom;
  RrParams rr;
  for (std::size_t labels : {2u, 3u, 5u, 10u, 26u}) {
    std::vector<double> counts(labels);
    for (std::size_t l = 0; l < labels; ++l) counts[l] = static_cast<double>(8 * ((l * 5) % 7));
    if (std::accumulate(counts.begin(), counts.end(), 0.0) == 0) counts[0] = 8;
    auto v = expected_sums(counts, bloom, rr);
    auto est = decode_counts(v, bloom, rr, labels, 0.0);
    for (std::size_t l = 0; l < labels; ++l) CHECK(est.counts[l] == doctest::Approx(counts[l]).epsilon(1e-4));
  }
}

TEST_CASE("estimates are clipped to [0, n] and never sum past n") {
  BloomParams bloom;
  RrParams rr;
  Rng rng(1);
  CountDecoder d(bloom, rr, 3);
  for (int trial = 0; trial < 200; ++trial) {
    BitCountVector v = BitCountVector::zero(32);
    v.n = 1 + rng.below(20);
    for (auto& s : v.sums) s = rng.below(v.n + 1);
    auto est = d.decode(v);
    double total = 0;
    for (double c : est.counts) {
      CHECK(c >= 0.0);
      CHECK(c <= static_cast<double>(v.n) + 1e-9);
      total += c;
    }
    CHECK(total <= static_cast<double>(v.n) + 1e-9);
  }
}

TEST_CASE("a single sample decodes within [0, 1] per class") {
  BitCountVector v = BitCountVector::zero(32);
  v.n = 1;
  v.sums[1] = v.sums[30] = 1;
  auto est = decode_counts(v, BloomParams{}, RrParams{}, 2, 0.01);
  for (double c : est.counts) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("decoder rejects unusable inputs") {
  BitCountVector empty = BitCountVector::zero(32);
  CHECK_THROWS(decode_counts(empty, BloomParams{}, RrParams{}, 2, 0.01));
  BitCountVector one = BitCountVector::zero(32);
  one.n = 1;
  CHECK_THROWS_AS(decode_counts(one, BloomParams{}, RrParams{0.5, 0.3, 0.3}, 2, 0.01), ConfigError);
  CHECK_THROWS(decode_counts(BitCountVector::zero(8), BloomParams{}, RrParams{}, 2, 0.01));
  // Collapsed codes need the penalty to pick a solution.
  BloomParams tiny{1, 1, 3};
  BitCountVector t = BitCountVector::zero(1);
  t.n = 4;
  t.sums[0] = 2;
  CHECK_THROWS_AS(decode_counts(t, tiny, RrParams{}, 3, 0.0), ConfigError);
  CHECK_NOTHROW(decode_counts(t, tiny, RrParams{}, 3, 0.04));
  // Zero rows decode to zero counts inside a session.
  CountDecoder d(BloomParams{}, RrParams{}, 2);
  auto z = d.decode(empty);
  CHECK(z.n == 0);
  CHECK(z.counts == std::vector<double>{0, 0});
}

TEST_CASE("end-to-end estimate on a 70/30 mix is close") {
  // Independent Monte-Carlo check of the whole pipeline with per-sample
  // reports rather than the binomial fast path.
  BloomParams bloom;
  RrParams rr;
  CountDecoder d(bloom, rr, 2);
  Rng rng(12);
  const int n = 10000;
  std::vector<BitString> reports;
  for (int i = 0; i < n; ++i) {
    std::uint32_t label = i < 7000 ? 0 : 1;
    auto perm = permanent_rr(bloom_encode(label, bloom), rr.keep, rng);
    reports.push_back(instant_rr(perm, rr.xi, rr.zeta, rng));
  }
  auto est = d.decode(aggregate_counts(reports, bloom.bits));
  double total = est.counts[0] + est.counts[1];
  CHECK(std::abs(est.counts[0] / total - 0.7) < 0.05);
}
