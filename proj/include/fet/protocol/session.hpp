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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "fet/dataset.hpp"
#include "fet/forest.hpp"
#include "fet/ldp.hpp"
#include "fet/protocol/messages.hpp"
#include "fet/protocol/transport.hpp"

namespace fet::protocol {

struct SessionConfig {
  int clients = 2;
  int trees = 20;
  int max_depth = 20;
  int min_samples_leaf = 1;
  // 0 selects ceil(sqrt(|F|)).
  int candidate_count = 0;
  PrivacyMode privacy = PrivacyMode::kNone;
  BloomParams bloom;
  RrParams rr;
  double epsilon_node = 1.0;
  // Lasso penalty per contributing sample used when decoding LDP counts.
  double ldp_lambda = 0.01;
  double subsample_fraction = 0.8;
  std::uint64_t master_seed = 1;
  std::chrono::milliseconds round_timeout{30000};

  // Throws ConfigError. Warns above ten clients.
  void validate(std::size_t feature_count) const;
  std::size_t candidates_for(std::size_t feature_count) const;
  std::uint64_t session_id() const;
  std::uint64_t client_seed(int client_id) const;
  // Settings recorded in the model file.
  nlohmann::ordered_json snapshot() const;
};

// Master-side view of a node when deciding whether to stop.
struct NodeState {
  int depth = 0;
  LabelCountEstimate estimate;
  // Every candidate feature came back degenerate or with an empty interval.
  bool all_degenerate = false;
};

bool stopping_condition(const NodeState& node, const SessionConfig& config);

struct MasterResult {
  Forest forest;
  PrivacyAccountant privacy{PrivacyMode::kNone, 0.0, 1};
};

/// Runs the coordinator side of a session over `links` (one per client, in
/// any order; ClientHello ids assign them). Aborts the whole session with
/// an Error message on any client failure.
MasterResult master_run(const SessionConfig& config, std::span<Transport* const> links);

// Test hooks into a client engine.
struct ClientProbe {
  virtual ~ClientProbe() = default;
  // True local range of `feature` at `node` and the value proposed for it.
  virtual void on_range(const NodeId& /*node*/, std::size_t /*feature*/, double /*min*/, double /*max*/,
                        const RangeEntry& /*sent*/) {}
  // A permanent encoding was computed for `row` of the client's shard.
  virtual void on_permanent_encoding(std::size_t /*row*/) {}
};

struct ClientResult {
  Forest forest;
  std::size_t permanent_encodings = 0;
};

/// Runs one client session over `link` and returns its copy of the forest.
ClientResult client_run(const SessionConfig& config, const DataShard& shard, int client_id, Transport& link,
                        ClientProbe* probe = nullptr);

struct SimulationResult {
  Forest forest;
  std::vector<Forest> client_forests;
  Transcript transcript;
  PrivacyAccountant privacy{PrivacyMode::kNone, 0.0, 1};
  std::vector<std::size_t> permanent_encodings;
};

// Runs the master and one thread per shard over in-process channels.
SimulationResult simulate_shards(const SessionConfig& config, std::span<const DataShard> shards,
                                 std::vector<ClientProbe*> probes = {});
// Deals `train` to config.clients shards (seeded from master_seed), then
// simulate_shards.
SimulationResult simulate(const SessionConfig& config, const DataShard& train);
std::vector<DataShard> deal_shards(const SessionConfig& config, const DataShard& train);

}  // namespace fet::protocol
