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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fet/dataset.hpp"

namespace fet {

// kAuto picks binary-positive for two classes and micro otherwise.
enum class F1Mode { kAuto, kBinaryPositive, kMicro };

std::string_view to_string(F1Mode mode);
F1Mode parse_f1_mode(std::string_view text);
F1Mode resolve_f1_mode(F1Mode mode, std::size_t labels);

double accuracy(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth);
// Binary-positive scores class 1; micro pools TP and FP over all classes.
double f1_score(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth, std::size_t labels,
                F1Mode mode = F1Mode::kAuto);

struct RunScores {
  double accuracy = 0;
  double f1 = 0;
  std::vector<double> precision;  // per class; 0 when never predicted
  std::vector<double> recall;     // per class; 0 when absent from truth
  std::size_t n_test = 0;
  double epsilon = 0;             // accountant total for the run
};

RunScores score_predictions(std::span<const ClassIndex> pred, std::span<const ClassIndex> truth, std::size_t labels,
                            F1Mode mode = F1Mode::kAuto);

struct MeanStd {
  double mean = 0;
  double stddev = 0;  // sample standard deviation; 0 for one value
};
MeanStd mean_std(std::span<const double> values);

struct EvalReport {
  std::string dataset;
  std::vector<std::string> classes;
  F1Mode f1_mode = F1Mode::kMicro;
  std::vector<RunScores> runs;

  MeanStd accuracy;
  MeanStd f1;
  std::vector<MeanStd> precision;
  std::vector<MeanStd> recall;
  std::size_t n_test = 0;
  double epsilon = 0;

  int repeats() const { return static_cast<int>(runs.size()); }
  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
};

// Fills the summary fields of a report from its runs.
EvalReport summarize(std::string dataset, std::vector<std::string> classes, F1Mode mode, std::vector<RunScores> runs);

}  // namespace fet
