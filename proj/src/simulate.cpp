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

#include <exception>
#include <thread>

#include "fet/error.hpp"
#include "fet/protocol/session.hpp"
#include "fet/random.hpp"

namespace fet::protocol {

std::vector<DataShard> deal_shards(const SessionConfig& config, const DataShard& train) {
  if (config.clients < 1) throw ConfigError("clients must be at least 1");
  auto shards = shard_rows(train, static_cast<std::size_t>(config.clients),
                           derive_seed(config.master_seed, Stream::kShard));
  for (std::size_t i = 0; i < shards.size(); ++i) shards[i].set_client_id(static_cast<int>(i));
  return shards;
}

SimulationResult simulate_shards(const SessionConfig& config, std::span<const DataShard> shards,
                                 std::vector<ClientProbe*> probes) {
  if (shards.size() != static_cast<std::size_t>(config.clients))
    throw ConfigError("got " + std::to_string(shards.size()) + " shards for " + std::to_string(config.clients) +
                      " clients");
  probes.resize(shards.size(), nullptr);

  SimulationResult result;
  std::vector<std::unique_ptr<Transport>> master_ends, client_ends;
  std::vector<std::unique_ptr<Transport>> recorders;
  std::vector<Transport*> links;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    auto [m, c] = make_channel_pair();
    recorders.push_back(std::make_unique<RecordingTransport>(*m, static_cast<int>(i), result.transcript));
    links.push_back(recorders.back().get());
    master_ends.push_back(std::move(m));
    client_ends.push_back(std::move(c));
  }

  std::vector<ClientResult> client_results(shards.size());
  std::vector<std::exception_ptr> client_errors(shards.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    threads.emplace_back([&, i] {
      try {
        client_results[i] = client_run(config, shards[i], static_cast<int>(i), *client_ends[i], probes[i]);
      } catch (...) {
        client_errors[i] = std::current_exception();
        client_ends[i]->close();
      }
    });
  }

  std::exception_ptr master_error;
  try {
    MasterResult master = master_run(config, links);
    result.forest = std::move(master.forest);
    result.privacy = std::move(master.privacy);
  } catch (...) {
    master_error = std::current_exception();
    for (auto& m : master_ends) m->close();
  }
  for (auto& t : threads) t.join();
  if (master_error) std::rethrow_exception(master_error);
  for (auto& e : client_errors)
    if (e) std::rethrow_exception(e);

  for (auto& r : client_results) {
    result.client_forests.push_back(std::move(r.forest));
    result.permanent_encodings.push_back(r.permanent_encodings);
  }
  return result;
}

SimulationResult simulate(const SessionConfig& config, const DataShard& train) {
  auto shards = deal_shards(config, train);
  return simulate_shards(config, shards);
}

}  // namespace fet::protocol
