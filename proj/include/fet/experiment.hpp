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

#include <cstdint>
#include <functional>
#include <string>

#include "fet/dataset.hpp"
#include "fet/metrics.hpp"
#include "fet/protocol/session.hpp"

namespace fet {

struct ExperimentOptions {
  protocol::SessionConfig session;
  double train_fraction = 0.8;
  int repeats = 1;
  F1Mode f1_mode = F1Mode::kAuto;
  std::string dataset_name;
};

// Seeds of repeat r: the session runs with master_seed + r and the
// train/test split uses a stream derived from that seed.
std::uint64_t repeat_seed(std::uint64_t base, int repeat);
std::uint64_t split_seed(std::uint64_t master_seed);

// Called after each repeat with its simulation result and scores.
using RepeatHook = std::function<void(int repeat, const protocol::SimulationResult&, const RunScores&)>;

/// Trains and evaluates `options.repeats` times on fresh splits of `data`.
EvalReport repeat_experiment(const ExperimentOptions& options, const DataShard& data, const RepeatHook& hook = {});

}  // namespace fet
