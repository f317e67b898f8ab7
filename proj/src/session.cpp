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

#include <spdlog/spdlog.h>

#include "fet/error.hpp"
#include "fet/protocol/session.hpp"
#include "fet/random.hpp"

namespace fet::protocol {

void SessionConfig::validate(std::size_t feature_count) const {
  if (clients < 1) throw ConfigError("clients must be >= 1");
  if (clients > 10) spdlog::warn("{} clients configured; the protocol is designed for at most 10", clients);
  if (trees < 1) throw ConfigError("trees must be >= 1");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (candidate_count < 0 || (feature_count > 0 && static_cast<std::size_t>(candidate_count) > feature_count))
    throw ConfigError("candidate_count must lie in [1, " + std::to_string(feature_count) + "] (0 = sqrt)");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
    throw ConfigError("subsample_fraction must lie in (0, 1]");
  if (round_timeout.count() <= 0) throw ConfigError("round_timeout must be positive");
  if (privacy != PrivacyMode::kNone && !(epsilon_node > 0.0)) throw ConfigError("epsilon_node must be > 0");
  if (privacy == PrivacyMode::kLdp) {
    bloom.validate();
    rr.validate();
    if (!(ldp_lambda >= 0.0)) throw ConfigError("ldp_lambda must be >= 0");
  }
}

std::size_t SessionConfig::candidates_for(std::size_t feature_count) const {
  if (candidate_count > 0) return std::min<std::size_t>(static_cast<std::size_t>(candidate_count), feature_count);
  auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(feature_count))));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(feature_count, 1));
}

std::uint64_t SessionConfig::session_id() const { return derive_seed(master_seed, Stream::kSession) >> 11; }

std::uint64_t SessionConfig::client_seed(int client_id) const {
  return derive_seed(master_seed, Stream::kClient, static_cast<std::uint64_t>(client_id));
}

nlohmann::ordered_json SessionConfig::snapshot() const {
  nlohmann::ordered_json j;
  j["clients"] = clients;
  j["trees"] = trees;
  j["max_depth"] = max_depth;
  j["min_samples_leaf"] = min_samples_leaf;
  j["candidate_count"] = candidate_count;
  j["privacy"] = to_string(privacy);
  if (privacy == PrivacyMode::kLdp) {
    j["bloom_bits"] = bloom.bits;
    j["bloom_hashes"] = bloom.hashes;
    j["hash_seed"] = bloom.hash_seed;
    j["pr"] = rr.keep;
    j["xi"] = rr.xi;
    j["zeta"] = rr.zeta;
    j["ldp_lambda"] = ldp_lambda;
  }
  if (privacy != PrivacyMode::kNone) j["epsilon_node"] = epsilon_node;
  j["subsample_fraction"] = subsample_fraction;
  j["seed"] = master_seed;
  return j;
}

bool stopping_condition(const NodeState& node, const SessionConfig& config) {
  if (node.depth >= config.max_depth) return true;
  if (node.estimate.n < static_cast<double>(config.min_samples_leaf) * config.clients) return true;
  const auto& c = node.estimate.counts;
  double total = std::accumulate(c.begin(), c.end(), 0.0);
  if (total > 0.0 && *std::max_element(c.begin(), c.end()) / total >= 0.999) return true;
  return node.all_degenerate;
}

}  // namespace fet::protocol
