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

#include "fet/experiment.hpp"

#include <spdlog/spdlog.h>

#include "fet/error.hpp"
#include "fet/random.hpp"

namespace fet {

std::uint64_t repeat_seed(std::uint64_t base, int repeat) { return base + static_cast<std::uint64_t>(repeat); }

std::uint64_t split_seed(std::uint64_t master_seed) { return derive_seed(master_seed, Stream::kSplit); }

EvalReport repeat_experiment(const ExperimentOptions& options, const DataShard& data, const RepeatHook& hook) {
  if (options.repeats < 1) throw ConfigError("repeats must be at least 1");
  const std::size_t labels = data.label_count();
  std::vector<RunScores> runs;
  for (int r = 0; r < options.repeats; ++r) {
    protocol::SessionConfig session = options.session;
    session.master_seed = repeat_seed(options.session.master_seed, r);
    auto [train, test] = split_train_test(data, options.train_fraction, split_seed(session.master_seed));
    auto sim = protocol::simulate(session, train);
    auto pred = sim.forest.predict(test);
    RunScores scores = score_predictions(pred, test.labels(), labels, options.f1_mode);
    scores.epsilon = sim.privacy.total();
    spdlog::info("repeat {}/{}: accuracy {:.4f}, f1 {:.4f}", r + 1, options.repeats, scores.accuracy, scores.f1);
    if (hook) hook(r, sim, scores);
    runs.push_back(std::move(scores));
  }
  return summarize(options.dataset_name, data.schema().labels.classes, options.f1_mode, std::move(runs));
}

}  // namespace fet
