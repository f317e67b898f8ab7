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

#include "fet/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fet/error.hpp"

namespace fet {

std::string_view to_string(PrivacyMode mode) {
  switch (mode) {
    case PrivacyMode::kNone: return "none";
    case PrivacyMode::kLdp: return "ldp";
    case PrivacyMode::kGdp: return "gdp";
  }
  return "none";
}

PrivacyMode parse_privacy_mode(std::string_view text) {
  if (text == "none") return PrivacyMode::kNone;
  if (text == "ldp") return PrivacyMode::kLdp;
  if (text == "gdp") return PrivacyMode::kGdp;
  throw ConfigError("unknown privacy mode '" + std::string(text) + "' (expected none, ldp or gdp)");
}

void BloomParams::validate() const {
  if (bits < 1) throw ConfigError("bloom_bits must be >= 1");
  if (hashes < 1 || hashes > bits) throw ConfigError("bloom_hashes must lie in [1, bloom_bits]");
}

void RrParams::validate() const {
  if (!(keep >= 0.0 && keep <= 1.0)) throw ConfigError("pr must lie in [0, 1]");
  if (!(xi > 0.0 && xi <= 1.0) || !(zeta >= 0.0 && zeta < 1.0)) throw ConfigError("xi and zeta must lie in [0, 1]");
  if (!(xi > zeta)) throw ConfigError("xi must exceed zeta, otherwise label counts are not identifiable");
  if (!(keep > 0.0)) throw ConfigError("pr must be > 0, otherwise label counts are not identifiable");
}

BitCountVector& BitCountVector::operator+=(const BitCountVector& other) {
  if (sums.size() != other.sums.size())
    throw Error("bit count length mismatch: " + std::to_string(sums.size()) + " vs " +
                std::to_string(other.sums.size()));
  for (std::size_t t = 0; t < sums.size(); ++t) sums[t] += other.sums[t];
  n += other.n;
  return *this;
}

BitString bloom_encode(std::uint32_t label, const BloomParams& params) {
  params.validate();
  BitString bits(params.bits, 0);
  for (std::size_t i = 0; i < params.hashes; ++i) {
    std::uint64_t key = mix64(params.hash_seed ^ mix64(static_cast<std::uint64_t>(i) + 1));
    bits[mix64(key ^ label) % params.bits] = 1;
  }
  return bits;
}

BitString permanent_rr(std::span<const std::uint8_t> bits, double keep, Rng& rng) {
  BitString out(bits.begin(), bits.end());
  for (auto& b : out)
    if (!rng.bernoulli(keep)) b = rng.bernoulli(0.5) ? 1 : 0;
  return out;
}

BitString instant_rr(std::span<const std::uint8_t> permanent_bits, double xi, double zeta, Rng& rng) {
  BitString out(permanent_bits.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = rng.bernoulli(permanent_bits[t] ? xi : zeta) ? 1 : 0;
  return out;
}

BitCountVector aggregate_counts(std::span<const BitString> reports, std::size_t bits) {
  BitCountVector out = BitCountVector::zero(bits);
  for (const auto& r : reports) {
    if (r.size() != bits) throw Error("report length " + std::to_string(r.size()) + " != " + std::to_string(bits));
    for (std::size_t t = 0; t < bits; ++t) out.sums[t] += r[t];
  }
  out.n = reports.size();
  return out;
}

BitCountVector merge_counts(std::span<const BitCountVector> vectors) {
  if (vectors.empty()) throw Error("merge_counts: nothing to merge");
  BitCountVector out = BitCountVector::zero(vectors.front().sums.size());
  for (const auto& v : vectors) out += v;
  return out;
}

BitCountVector instant_rr_sums(std::span<const std::uint64_t> ones, std::uint64_t n, double xi, double zeta,
                               Rng& rng) {
  BitCountVector out = BitCountVector::zero(ones.size());
  out.n = n;
  for (std::size_t t = 0; t < ones.size(); ++t) {
    if (ones[t] > n) throw Error("instant_rr_sums: more set bits than samples");
    out.sums[t] = rng.binomial(ones[t], xi) + rng.binomial(n - ones[t], zeta);
  }
  return out;
}

std::vector<double> laplace_perturb(std::span<const double> counts, double epsilon_node, Rng& rng) {
  if (!(epsilon_node > 0.0)) throw ConfigError("epsilon_node must be > 0");
  std::vector<double> out(counts.begin(), counts.end());
  const double scale = 1.0 / epsilon_node;
  for (auto& c : out) c += rng.laplace(scale);
  return out;
}

double epsilon_per_tree(double epsilon_node, int depth) {
  if (depth < 0) throw Error("negative tree depth");
  return epsilon_node * static_cast<double>(depth + 1);
}

double epsilon_per_tree(const PrivacyBudget& budget) {
  if (budget.max_depth < 1) throw ConfigError("max_depth must be >= 1");
  return epsilon_per_tree(budget.epsilon_node, budget.max_depth);
}

double epsilon_total(const std::vector<std::vector<double>>& per_tree_per_client) {
  double total = 0.0;
  for (const auto& tree : per_tree_per_client) {
    if (tree.empty()) throw Error("epsilon_total: tree without clients");
    total += *std::max_element(tree.begin(), tree.end());
  }
  return total;
}

PrivacyAccountant::PrivacyAccountant(PrivacyMode mode, double epsilon_node, int clients)
    : mode_(mode), epsilon_node_(epsilon_node), clients_(clients) {}

void PrivacyAccountant::record_tree(int depth) { record_tree(std::vector<int>(static_cast<std::size_t>(clients_), depth)); }

void PrivacyAccountant::record_tree(const std::vector<int>& client_depths) {
  std::vector<double> row;
  row.reserve(client_depths.size());
  for (int d : client_depths) row.push_back(epsilon_per_tree(epsilon_node_, d));
  per_tree_.push_back(std::move(row));
}

double PrivacyAccountant::total() const {
  if (mode_ == PrivacyMode::kNone) return std::numeric_limits<double>::infinity();
  if (per_tree_.empty()) return 0.0;
  return epsilon_total(per_tree_);
}

}  // namespace fet
