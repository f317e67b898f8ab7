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

#include "fet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fet/error.hpp"

namespace fet {
namespace {

void check_lengths(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth) {
  if (pred.size() != truth.size())
    throw ConfigError("prediction and truth lengths differ: " + std::to_string(pred.size()) + " vs " +
                      std::to_string(truth.size()));
  if (pred.empty()) throw ConfigError("cannot score an empty prediction set");
}

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

std::string_view to_string(F1Mode mode) {
  switch (mode) {
    case F1Mode::kAuto: return "auto";
    case F1Mode::kBinaryPositive: return "binary";
    case F1Mode::kMicro: return "micro";
  }
  return "auto";
}

F1Mode parse_f1_mode(std::string_view text) {
  if (text == "auto") return F1Mode::kAuto;
  if (text == "binary") return F1Mode::kBinaryPositive;
  if (text == "micro") return F1Mode::kMicro;
  throw ConfigError("unknown f1 mode '" + std::string(text) + "' (expected auto, binary or micro)");
}

F1Mode resolve_f1_mode(F1Mode mode, std::size_t labels) {
  if (mode == F1Mode::kAuto) return labels == 2 ? F1Mode::kBinaryPositive : F1Mode::kMicro;
  if (mode == F1Mode::kBinaryPositive && labels != 2)
    throw ConfigError("binary F1 needs exactly 2 classes, got " + std::to_string(labels));
  return mode;
}

double accuracy(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth) {
  check_lengths(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double f1_score(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth, std::size_t labels, F1Mode mode) {
  check_lengths(pred, truth);
  mode = resolve_f1_mode(mode, labels);
  if (mode == F1Mode::kMicro) {
    // Every prediction is either a true positive for its class or a false
    // positive, so pooled precision and recall are both the hit rate.
    double tp = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) tp += pred[i] == truth[i];
    double p = tp / static_cast<double>(pred.size());
    return ratio(2 * p * p, 2 * p);
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool p = pred[i] == 1, t = truth[i] == 1;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  double precision = ratio(tp, tp + fp);
  double recall = ratio(tp, tp + fn);
  return ratio(2 * precision * recall, precision + recall);
}

RunScores score_predictions(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth, std::size_t labels,
                            F1Mode mode) {
  RunScores s;
  s.accuracy = accuracy(pred, truth);
  s.f1 = f1_score(pred, truth, labels, mode);
  s.n_test = pred.size();
  std::vector<double> tp(labels, 0), predicted(labels, 0), actual(labels, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= labels || truth[i] >= labels) throw ConfigError("class index outside the label space");
    predicted[pred[i]] += 1;
    actual[truth[i]] += 1;
    if (pred[i] == truth[i]) tp[pred[i]] += 1;
  }
  for (std::size_t l = 0; l < labels; ++l) {
    s.precision.push_back(ratio(tp[l], predicted[l]));
    s.recall.push_back(ratio(tp[l], actual[l]));
  }
  return s;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

EvalReport summarize(std::string dataset, std::vector<std::string> classes, F1Mode mode, std::vector<RunScores> runs) {
  if (runs.empty()) throw ConfigError("a report needs at least one run");
  EvalReport r;
  r.dataset = std::move(dataset);
  r.classes = std::move(classes);
  r.f1_mode = resolve_f1_mode(mode, r.classes.size());
  r.runs = std::move(runs);
  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& run : r.runs) v.push_back(get(run));
    return mean_std(v);
  };
  r.accuracy = column([](const RunScores& s) { return s.accuracy; });
  r.f1 = column([](const RunScores& s) { return s.f1; });
  r.epsilon = column([](const RunScores& s) { return s.epsilon; }).mean;
  r.n_test = r.runs.front().n_test;
  for (std::size_t l = 0; l < r.classes.size(); ++l) {
    r.precision.push_back(column([l](const RunScores& s) { return s.precision.at(l); }));
    r.recall.push_back(column([l](const RunScores& s) { return s.recall.at(l); }));
  }
  return r;
}

nlohmann::ordered_json EvalReport::to_json() const {
  using nlohmann::ordered_json;
  auto ms = [](const MeanStd& m) { return ordered_json{{"mean", m.mean}, {"stddev", m.stddev}}; };
  ordered_json j;
  j["dataset"] = dataset;
  j["repeats"] = repeats();
  j["n_test"] = n_test;
  j["f1_mode"] = std::string(to_string(f1_mode));
  j["accuracy"] = ms(accuracy);
  j["f1"] = ms(f1);
  // JSON has no infinity; an unbounded budget is written as null.
  j["epsilon"] = std::isfinite(epsilon) ? ordered_json(epsilon) : ordered_json(nullptr);
  ordered_json per_class = ordered_json::array();
  for (std::size_t l = 0; l < classes.size(); ++l)
    per_class.push_back({{"class", classes[l]}, {"precision", ms(precision[l])}, {"recall", ms(recall[l])}});
  j["per_class"] = std::move(per_class);
  ordered_json rows = ordered_json::array();
  for (const auto& run : runs) rows.push_back({{"accuracy", run.accuracy}, {"f1", run.f1}});
  j["runs"] = std::move(rows);
  return j;
}

std::string EvalReport::to_table() const {
  std::string out = fmt::format("dataset   {}\nrepeats   {}\nn_test    {}\naccuracy  {:.4f} +- {:.4f}\nf1 ({:<6}) {:.4f} +- {:.4f}\n",
                                dataset, repeats(), n_test, accuracy.mean, accuracy.stddev, to_string(f1_mode),
                                f1.mean, f1.stddev);
  out += fmt::format("epsilon   {}\n\n", std::isnan(epsilon) ? std::string("n/a") : std::isfinite(epsilon) ? fmt::format("{:.4g}", epsilon) : std::string("inf (no privacy)"));
  std::size_t width = 5;
  for (const auto& c : classes) width = std::max(width, c.size());
  out += fmt::format("{:<{}}  {:>9}  {:>9}\n", "class", width, "precision", "recall");
  for (std::size_t l = 0; l < classes.size(); ++l)
    out += fmt::format("{:<{}}  {:>9.4f}  {:>9.4f}\n", classes[l], width, precision[l].mean, recall[l].mean);
  return out;
}

}  // namespace fet
