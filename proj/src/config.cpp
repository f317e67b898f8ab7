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

#include "fet/config.hpp"

#include <CLI11.hpp>

#include "fet/error.hpp"

namespace fet {

void RunConfig::resolve() {
  session.privacy = parse_privacy_mode(privacy);
  parse_f1_mode(f1_mode);
  if (timeout_ms <= 0) throw ConfigError("timeout-ms must be positive");
  session.round_timeout = std::chrono::milliseconds(timeout_ms);
  if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train-fraction must be in (0, 1)");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (session.clients < 1) throw ConfigError("clients must be at least 1");
  if (session.trees < 1) throw ConfigError("trees must be at least 1");
  if (session.max_depth < 0) throw ConfigError("max-depth must be non-negative");
  if (!(session.epsilon_node > 0)) throw ConfigError("epsilon-node must be positive");
  if (client_id < 0 || client_id >= session.clients)
    throw ConfigError("client-id " + std::to_string(client_id) + " outside [0, clients)");
  session.bloom.validate();
  session.rr.validate();
}

CsvOptions RunConfig::csv() const {
  CsvOptions o;
  o.label_column = label_column;
  o.has_header = !no_header;
  o.categorical = categorical;
  o.classes = classes;
  return o;
}

ExperimentOptions RunConfig::experiment() const {
  ExperimentOptions e;
  e.session = session;
  e.train_fraction = train_fraction;
  e.repeats = repeats;
  e.f1_mode = parse_f1_mode(f1_mode);
  e.dataset_name = dataset_name.empty() ? std::filesystem::path(data).stem().string() : dataset_name;
  return e;
}

void add_run_options(CLI::App& app, RunConfig& c) {
  app.set_config("--config", "", "TOML-style file of option = value lines");
  app.allow_config_extras(false);

  auto& s = c.session;
  app.add_option("--clients", s.clients, "number of clients O");
  app.add_option("--trees", s.trees, "number of trees P");
  app.add_option("--max-depth", s.max_depth, "maximum tree depth");
  app.add_option("--min-samples-leaf", s.min_samples_leaf, "stop below this many samples per client");
  app.add_option("--candidates", s.candidate_count, "candidate features per node (0: ceil(sqrt(F)))");
  app.add_option("--subsample", s.subsample_fraction, "per-tree client subsample fraction");
  app.add_option("--seed", s.master_seed, "master seed");
  app.add_option("--privacy", c.privacy, "none, ldp or gdp")->check(CLI::IsMember({"none", "ldp", "gdp"}));
  app.add_option("--epsilon-node", s.epsilon_node, "per-query privacy budget");
  app.add_option("--bloom-bits", s.bloom.bits, "Bloom filter length h");
  app.add_option("--bloom-hashes", s.bloom.hashes, "Bloom hash count m");
  app.add_option("--bloom-seed", s.bloom.hash_seed, "Bloom hash seed");
  app.add_option("--rr-keep", s.rr.keep, "permanent randomized response keep probability");
  app.add_option("--rr-xi", s.rr.xi, "instant randomized response P(1 | 1)");
  app.add_option("--rr-zeta", s.rr.zeta, "instant randomized response P(1 | 0)");
  app.add_option("--ldp-lambda", s.ldp_lambda, "lasso penalty per sample when decoding");
  app.add_option("--timeout-ms", c.timeout_ms, "per-round timeout");

  app.add_option("--data", c.data, "CSV dataset (or a client's shard)");
  app.add_option("--dataset-name", c.dataset_name, "name used in reports");
  app.add_option("--label-column", c.label_column, "label column (default: last)");
  app.add_flag("--no-header", c.no_header, "CSV has no header row");
  app.add_option("--categorical", c.categorical, "categorical columns")->delimiter(',');
  app.add_option("--classes", c.classes, "fixed class order")->delimiter(',');
  app.add_option("--train-fraction", c.train_fraction, "train share of each split");
  app.add_option("--repeats", c.repeats, "repeats per experiment");
  app.add_option("--f1-mode", c.f1_mode, "auto, binary or micro")->check(CLI::IsMember({"auto", "binary", "micro"}));

  app.add_option("--out", c.out, "output directory (predict: output file)");
  app.add_option("--model", c.model, "model file for predict and eval");
  app.add_option("--listen", c.listen, "master address host:port");
  app.add_option("--connect", c.connect, "client target host:port");
  app.add_option("--client-id", c.client_id, "this client's id");
  app.add_option("--shards-out", c.shards_out, "simulate: also write the dealt shards here");
  app.add_option("--sweep-axis", c.sweep_axis, "clients, trees or depth")
      ->check(CLI::IsMember({"clients", "trees", "depth"}));
  app.add_option("--sweep-values", c.sweep_values, "values of the swept parameter")->delimiter(',');
  app.add_option("--log-level", c.log_level, "trace, debug, info, warn, error or off (overrides FET_LOG)");
}

}  // namespace fet
