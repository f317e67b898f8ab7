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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fet/config.hpp"
#include "fet/error.hpp"
#include "fet/experiment.hpp"
#include "fet/forest.hpp"
#include "fet/metrics.hpp"
#include "fet/protocol/session.hpp"
#include "fet/protocol/transport.hpp"

namespace fs = std::filesystem;

namespace fet {
namespace {

void setup_logging(const RunConfig& cfg) {
  auto logger = spdlog::stderr_color_mt("fet");
  spdlog::set_default_logger(logger);
  std::string level = cfg.log_level;
  if (level.empty()) {
    const char* env = std::getenv("FET_LOG");
    level = env ? env : "warn";
  }
  auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") throw ConfigError("unknown log level '" + level + "'");
  spdlog::set_level(parsed);
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

DataShard load_data(const RunConfig& cfg) {
  if (cfg.data.empty()) throw ConfigError("--data is required");
  return load_csv(cfg.data, cfg.csv());
}

void print_privacy(const PrivacyAccountant& acc) {
  if (acc.mode() == PrivacyMode::kNone) {
    std::cout << "privacy: none (no differential privacy guarantee)\n";
    return;
  }
  std::cout << fmt::format("privacy: {} epsilon_node={} trees={} total epsilon={:.6g}\n", to_string(acc.mode()),
                           acc.epsilon_node(), acc.per_tree().size(), acc.total());
}

void print_privacy(const RunConfig& cfg, double epsilon) {
  if (cfg.session.privacy == PrivacyMode::kNone) {
    std::cout << "privacy: none (no differential privacy guarantee)\n";
    return;
  }
  std::cout << fmt::format("privacy: {} epsilon_node={} mean total epsilon per run={:.6g}\n",
                           to_string(cfg.session.privacy), cfg.session.epsilon_node, epsilon);
}

void write_report(const EvalReport& report, const fs::path& dir) {
  write_text(dir / "report.json", report.to_json().dump(2) + "\n");
  write_text(dir / "report.txt", report.to_table());
  std::cout << report.to_table();
}

int cmd_simulate(const RunConfig& cfg) {
  DataShard data = load_data(cfg);
  cfg.session.validate(data.feature_count());
  fs::path out = ensure_dir(cfg.out);
  ExperimentOptions options = cfg.experiment();
  if (!cfg.shards_out.empty()) {
    // The shards repeat 0 trains on, for replaying it with real clients.
    fs::path dir = ensure_dir(cfg.shards_out);
    auto [train, test] = split_train_test(data, cfg.train_fraction, split_seed(cfg.session.master_seed));
    auto shards = protocol::deal_shards(cfg.session, train);
    for (std::size_t i = 0; i < shards.size(); ++i) write_csv(shards[i], dir / fmt::format("shard_{}.csv", i));
    write_csv(test, dir / "test.csv");
  }
  auto report = repeat_experiment(options, data, [&](int r, const protocol::SimulationResult& sim, const RunScores&) {
    if (r == 0) save_model(sim.forest, out / "model.json");
  });
  write_report(report, out);
  print_privacy(cfg, report.epsilon);
  return 0;
}

int cmd_master(const RunConfig& cfg) {
  protocol::TcpListener listener(cfg.listen);
  spdlog::info("master listening on port {}", listener.port());
  std::vector<std::unique_ptr<protocol::Transport>> conns;
  for (int i = 0; i < cfg.session.clients; ++i) conns.push_back(listener.accept(cfg.session.round_timeout));
  std::vector<protocol::Transport*> links;
  for (auto& c : conns) links.push_back(c.get());
  auto result = protocol::master_run(cfg.session, links);
  for (auto& c : conns) c->close();
  fs::path out = ensure_dir(cfg.out);
  save_model(result.forest, out / "model.json");
  std::cout << fmt::format("master: trained {} trees with {} clients\n", result.forest.trees.size(), links.size());
  print_privacy(result.privacy);
  return 0;
}

int cmd_client(const RunConfig& cfg) {
  DataShard shard = load_data(cfg);
  shard.set_client_id(cfg.client_id);
  auto link = protocol::tcp_connect(cfg.connect, cfg.session.round_timeout);
  auto result = protocol::client_run(cfg.session, shard, cfg.client_id, *link);
  link->close();
  fs::path out = ensure_dir(cfg.out);
  save_model(result.forest, out / "model.json");
  std::cout << fmt::format("client {}: received {} trees\n", cfg.client_id, result.forest.trees.size());
  PrivacyAccountant acc(cfg.session.privacy, cfg.session.epsilon_node, 1);
  for (const auto& t : result.forest.trees) acc.record_tree(t.depth());
  print_privacy(acc);
  return 0;
}

Forest load_model_arg(const RunConfig& cfg) {
  if (cfg.model.empty()) throw ConfigError("--model is required");
  return load_model(cfg.model);
}

int cmd_predict(const RunConfig& cfg) {
  Forest forest = load_model_arg(cfg);
  if (cfg.data.empty()) throw ConfigError("--data is required");
  auto rows = load_feature_rows(cfg.data, *forest.schema, cfg.csv());
  fs::path out(cfg.out);
  if (fs::is_directory(out)) out /= "predictions.txt";
  std::string text;
  for (const auto& row : rows) text += forest.schema->labels.classes[forest.predict(row)] + "\n";
  write_text(out, text);
  spdlog::info("wrote {} predictions to {}", rows.size(), out.string());
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  Forest forest = load_model_arg(cfg);
  CsvOptions csv = cfg.csv();
  csv.classes = forest.schema->labels.classes;
  if (cfg.data.empty()) throw ConfigError("--data is required");
  DataShard data = load_csv(cfg.data, csv);
  if (data.feature_count() != forest.schema->feature_count())
    throw ConfigError(fmt::format("data has {} features, model expects {}", data.feature_count(),
                                  forest.schema->feature_count()));
  auto pred = forest.predict(data);
  RunScores scores = score_predictions(pred, data.labels(), data.label_count(), parse_f1_mode(cfg.f1_mode));
  scores.epsilon = std::numeric_limits<double>::quiet_NaN();
  auto report = summarize(cfg.experiment().dataset_name, forest.schema->labels.classes, parse_f1_mode(cfg.f1_mode),
                          {scores});
  write_report(report, ensure_dir(cfg.out));
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.sweep_axis.empty() || cfg.sweep_values.empty())
    throw ConfigError("sweep needs --sweep-axis and --sweep-values");
  DataShard data = load_data(cfg);
  fs::path out = ensure_dir(cfg.out);
  std::string csv = fmt::format("{},accuracy_mean,accuracy_std,f1_mean,f1_std,epsilon\n", cfg.sweep_axis);
  for (auto value : cfg.sweep_values) {
    ExperimentOptions options = cfg.experiment();
    int v = static_cast<int>(value);
    if (cfg.sweep_axis == "clients") options.session.clients = v;
    if (cfg.sweep_axis == "trees") options.session.trees = v;
    if (cfg.sweep_axis == "depth") options.session.max_depth = v;
    options.session.validate(data.feature_count());
    auto report = repeat_experiment(options, data);
    std::string row = fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", value, report.accuracy.mean,
                                  report.accuracy.stddev, report.f1.mean, report.f1.stddev,
                                  std::isfinite(report.epsilon) ? fmt::format("{:.6g}", report.epsilon) : "inf");
    std::cout << row << std::flush;
    csv += row;
  }
  write_text(out / fmt::format("sweep_{}.csv", cfg.sweep_axis), csv);
  return 0;
}

}  // namespace
}  // namespace fet

int main(int argc, char** argv) {
  using namespace fet;
  CLI::App app{"Federated Extra-Trees: simulation, deployment and evaluation"};
  app.fallthrough();
  app.require_subcommand(1);
  RunConfig cfg;
  add_run_options(app, cfg);
  auto* simulate = app.add_subcommand("simulate", "train in-process with simulated clients and evaluate");
  auto* master = app.add_subcommand("master", "coordinate a training session over TCP");
  auto* client = app.add_subcommand("client", "join a training session with a local data shard");
  auto* predict = app.add_subcommand("predict", "classify CSV rows with a saved model");
  auto* sweep = app.add_subcommand("sweep", "repeat experiments over clients, trees or depth");
  auto* eval = app.add_subcommand("eval", "score a saved model on a labeled CSV");
  for (auto* sub : {simulate, master, client, predict, sweep, eval}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "fet: " << e.what() << "\n";
    return 2;
  }

  try {
    setup_logging(cfg);
    cfg.resolve();
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (master->parsed()) return cmd_master(cfg);
    if (client->parsed()) return cmd_client(cfg);
    if (predict->parsed()) return cmd_predict(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "fet: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ProtocolError& e) {
    std::cerr << "fet: protocol error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "fet: i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "fet: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
