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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fet/random.hpp"

namespace fet {

enum class PrivacyMode { kNone, kLdp, kGdp };

std::string_view to_string(PrivacyMode mode);
PrivacyMode parse_privacy_mode(std::string_view text);

// One bit per byte; values are 0 or 1.
using BitString = std::vector<std::uint8_t>;

struct BloomParams {
  std::size_t bits = 32;    // h
  std::size_t hashes = 2;   // m
  // Chosen so that labels 0..25 get distinct, linearly independent codes
  // of weight m at the default h and m.
  std::uint64_t hash_seed = 0x5ef7;

  void validate() const;
  bool operator==(const BloomParams&) const = default;
};

struct RrParams {
  double keep = 0.5;    // permanent-layer keep probability
  double xi = 0.75;     // P(report 1 | permanent bit 1)
  double zeta = 0.25;   // P(report 1 | permanent bit 0)

  void validate() const;
  // P(report 1 | true Bloom bit 1) and P(report 1 | true Bloom bit 0) after
  // both randomized-response layers.
  double q_eff() const { return xi * (1 + keep) / 2 + zeta * (1 - keep) / 2; }
  double p_eff() const { return xi * (1 - keep) / 2 + zeta * (1 + keep) / 2; }
  bool operator==(const RrParams&) const = default;
};

struct BitCountVector {
  std::vector<std::uint64_t> sums;
  std::uint64_t n = 0;

  static BitCountVector zero(std::size_t bits) { return {std::vector<std::uint64_t>(bits, 0), 0}; }
  BitCountVector& operator+=(const BitCountVector& other);
  bool operator==(const BitCountVector&) const = default;
};

struct LabelCountEstimate {
  std::vector<double> counts;
  double n = 0;
};

BitString bloom_encode(std::uint32_t label, const BloomParams& params);
// Each bit kept with probability `keep`, otherwise replaced by a fair coin.
BitString permanent_rr(std::span<const std::uint8_t> bits, double keep, Rng& rng);
// Each bit reported as 1 with probability xi when set, zeta when clear.
BitString instant_rr(std::span<const std::uint8_t> permanent_bits, double xi, double zeta, Rng& rng);

BitCountVector aggregate_counts(std::span<const BitString> reports, std::size_t bits);
BitCountVector merge_counts(std::span<const BitCountVector> vectors);

// Bit sums of instant-RR reports for n samples whose permanent strings have
// `ones[t]` set bits at position t. Draws the two binomials per bit that the
// per-sample reports sum to, so it equals aggregate_counts(instant_rr(...))
// in distribution.
BitCountVector instant_rr_sums(std::span<const std::uint64_t> ones, std::uint64_t n, double xi, double zeta,
                               Rng& rng);

/// Recovers per-class counts from merged instant-RR bit sums.
///
/// Each bit sum is first bias-corrected into an unbiased estimate of how
/// many samples have that Bloom bit set, y_t = (Sum_t - n p_eff) / (q_eff -
/// p_eff). Class counts c then solve the non-negative lasso
///
///     min_c ||y - M c||^2 + lambda ||c||_1,   c >= 0,
///
/// where column l of the h x L design matrix M is bloom_encode(l), by
/// cyclic coordinate descent. The result is clipped to [0, n] and scaled
/// down if it sums past n.
class CountDecoder {
 public:
  CountDecoder(const BloomParams& bloom, const RrParams& rr, std::size_t labels);

  // reg_lambda < 0 selects lambda_per_sample * n.
  LabelCountEstimate decode(const BitCountVector& merged, double reg_lambda = -1) const;

  std::size_t rank() const { return rank_; }
  bool full_rank() const { return rank_ == labels_; }
  double lambda_per_sample = 0.01;
  double tolerance = 1e-6;
  int max_sweeps = 10000;

 private:
  BloomParams bloom_;
  RrParams rr_;
  std::size_t labels_;
  std::vector<BitString> columns_;
  std::vector<double> column_norm2_;
  std::size_t rank_ = 0;
};

LabelCountEstimate decode_counts(const BitCountVector& merged, const BloomParams& bloom, const RrParams& rr,
                                 std::size_t labels, double reg_lambda);

// Adds Laplace(1 / epsilon_node) noise to each count (sensitivity 1).
std::vector<double> laplace_perturb(std::span<const double> counts, double epsilon_node, Rng& rng);

struct PrivacyBudget {
  double epsilon_node = 1.0;
  int max_depth = 1;
  int trees = 1;
  int clients = 1;
  PrivacyMode mode = PrivacyMode::kLdp;
};

// epsilon_node * (depth + 1): one query layer per tree level plus the leaf layer.
double epsilon_per_tree(double epsilon_node, int depth);
double epsilon_per_tree(const PrivacyBudget& budget);
// Sum over trees of the per-tree maximum across clients.
double epsilon_total(const std::vector<std::vector<double>>& per_tree_per_client);

/// Ledger of per-tree, per-client budgets for one training run.
class PrivacyAccountant {
 public:
  PrivacyAccountant(PrivacyMode mode, double epsilon_node, int clients);

  // `depth` is the realised depth of the finished tree.
  void record_tree(int depth);
  // Per-client depths, for runs where clients stop contributing early.
  void record_tree(const std::vector<int>& client_depths);

  PrivacyMode mode() const { return mode_; }
  double epsilon_node() const { return epsilon_node_; }
  const std::vector<std::vector<double>>& per_tree() const { return per_tree_; }
  // Infinity when mode is kNone.
  double total() const;

 private:
  PrivacyMode mode_;
  double epsilon_node_;
  int clients_;
  std::vector<std::vector<double>> per_tree_;
};

}  // namespace fet
