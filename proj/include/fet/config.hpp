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
#include <filesystem>
#include <string>
#include <vector>

#include "fet/dataset.hpp"
#include "fet/experiment.hpp"
#include "fet/protocol/session.hpp"

namespace CLI {
class App;
}

namespace fet {

/// Everything a command needs. Each field is both a flag and a key of the
/// `--config` file (same name without the dashes); flags win over the file,
/// which wins over the defaults below.
struct RunConfig {
  protocol::SessionConfig session;
  std::string privacy = "none";
  std::int64_t timeout_ms = 30000;

  std::string data;
  std::string dataset_name;
  std::string label_column;
  bool no_header = false;
  std::vector<std::string> categorical;
  std::vector<std::string> classes;
  double train_fraction = 0.8;
  int repeats = 1;
  std::string f1_mode = "auto";

  std::string out = "out";
  std::string model;
  std::string listen = "127.0.0.1:7070";
  std::string connect = "127.0.0.1:7070";
  int client_id = 0;
  std::string shards_out;

  std::string sweep_axis;
  std::vector<std::int64_t> sweep_values;

  std::string log_level;

  // Copies the string-typed settings into `session`. Throws ConfigError.
  void resolve();
  CsvOptions csv() const;
  ExperimentOptions experiment() const;
};

// Registers every RunConfig field as an option of `app` plus `--config`.
void add_run_options(CLI::App& app, RunConfig& config);

}  // namespace fet
