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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fet/error.hpp"
#include "fet/ldp.hpp"

namespace fet {
namespace {

std::size_t column_rank(const std::vector<BitString>& columns, std::size_t rows) {
  const std::size_t cols = columns.size();
  std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r) a[r][c] = columns[c][r];
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    for (std::size_t r = rank + 1; r < rows; ++r)
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    if (std::abs(a[pivot][c]) < 1e-9) continue;
    std::swap(a[pivot], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      double f = a[r][c] / a[rank][c];
      for (std::size_t k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

CountDecoder::CountDecoder(const BloomParams& bloom, const RrParams& rr, std::size_t labels)
    : bloom_(bloom), rr_(rr), labels_(labels) {
  bloom_.validate();
  rr_.validate();
  if (labels_ < 1) throw ConfigError("decoder needs at least one class");
  columns_.reserve(labels_);
  for (std::size_t l = 0; l < labels_; ++l) {
    columns_.push_back(bloom_encode(static_cast<std::uint32_t>(l), bloom_));
    column_norm2_.push_back(std::accumulate(columns_.back().begin(), columns_.back().end(), 0.0));
  }
  rank_ = column_rank(columns_, bloom_.bits);
}

LabelCountEstimate CountDecoder::decode(const BitCountVector& merged, double reg_lambda) const {
  if (merged.sums.size() != bloom_.bits)
    throw Error("bit sums have length " + std::to_string(merged.sums.size()) + ", expected " +
                std::to_string(bloom_.bits));
  const double n = static_cast<double>(merged.n);
  LabelCountEstimate est{std::vector<double>(labels_, 0.0), n};
  if (merged.n == 0) return est;

  const double lambda = reg_lambda < 0 ? lambda_per_sample * n : reg_lambda;
  if (lambda == 0.0 && !full_rank())
    throw ConfigError("Bloom design matrix has rank " + std::to_string(rank_) + " < " + std::to_string(labels_) +
                      " classes; decoding needs reg_lambda > 0");

  const double q = rr_.q_eff();
  const double p = rr_.p_eff();
  const std::size_t h = bloom_.bits;
  std::vector<double> residual(h);
  for (std::size_t t = 0; t < h; ++t) residual[t] = (static_cast<double>(merged.sums[t]) - n * p) / (q - p);

  // Cyclic coordinate descent on ||y - Mc||^2 + lambda ||c||_1, c >= 0.
  // residual holds y - Mc throughout.
  auto& c = est.counts;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t l = 0; l < labels_; ++l) {
      const BitString& col = columns_[l];
      double rho = 0.0;
      for (std::size_t t = 0; t < h; ++t)
        if (col[t]) rho += residual[t];
      rho += column_norm2_[l] * c[l];
      double next = std::max(0.0, (rho - lambda / 2) / column_norm2_[l]);
      double delta = next - c[l];
      if (delta != 0.0) {
        for (std::size_t t = 0; t < h; ++t)
          if (col[t]) residual[t] -= delta;
        c[l] = next;
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    if (max_change < tolerance) break;
  }

  double total = 0.0;
  for (auto& v : c) {
    v = std::clamp(v, 0.0, n);
    total += v;
  }
  if (total > n)
    for (auto& v : c) v *= n / total;
  return est;
}

LabelCountEstimate decode_counts(const BitCountVector& merged, const BloomParams& bloom, const RrParams& rr,
                                 std::size_t labels, double reg_lambda) {
  if (!(rr.xi > rr.zeta)) throw ConfigError("xi must exceed zeta, otherwise label counts are not identifiable");
  if (merged.n < 1) throw Error("decode_counts needs at least one sample");
  if (reg_lambda < 0) throw ConfigError("reg_lambda must be >= 0");
  CountDecoder decoder(bloom, rr, labels);
  return decoder.decode(merged, reg_lambda);
}

}  // namespace fet
