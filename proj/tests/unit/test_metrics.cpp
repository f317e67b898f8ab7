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

#include <doctest.h>

#include <numeric>

#include "fet/error.hpp"
#include "fet/experiment.hpp"
#include "fet/metrics.hpp"
#include "fet/random.hpp"
#include "test_util.hpp"

using namespace fet;

namespace {

using Labels = std::vector<ClassIndex>;

}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy(Labels{0, 1, 2}, Labels{0, 1, 2}) == 1.0);
  CHECK(accuracy(Labels{1, 0}, Labels{0, 1}) == 0.0);
  CHECK(accuracy(Labels{1, 1, 0, 1}, Labels{1, 1, 0, 0}) == 0.75);
  CHECK_THROWS_AS(accuracy(Labels{1}, Labels{1, 0}), ConfigError);
  CHECK_THROWS_AS(accuracy(Labels{}, Labels{}), ConfigError);
}

TEST_CASE("binary F1 scores the positive class") {
  // P = 1/2, R = 1, F1 = 2 * 0.5 / 1.5.
  CHECK(f1_score(Labels{1, 1, 0, 0}, Labels{1, 0, 0, 0}, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(f1_score(Labels{1, 0, 1}, Labels{1, 0, 1}, 2, F1Mode::kBinaryPositive) == 1.0);
  CHECK(f1_score(Labels{0, 0}, Labels{0, 0}, 2) == 0.0);
  CHECK_THROWS_AS(f1_score(Labels{0, 1}, Labels{0, 2}, 3, F1Mode::kBinaryPositive), ConfigError);
}

TEST_CASE("micro F1 equals accuracy for single-label predictions") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t labels = 2 + rng.below(5);
    std::size_t n = 1 + rng.below(60);
    Labels pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<ClassIndex>(rng.below(labels));
      truth[i] = static_cast<ClassIndex>(rng.below(labels));
    }
    CHECK(f1_score(pred, truth, labels, F1Mode::kMicro) == doctest::Approx(accuracy(pred, truth)).epsilon(1e-15));
  }
}

TEST_CASE("accuracy is invariant under a consistent relabeling") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t labels = 2 + rng.below(5), n = 1 + rng.below(50);
    Labels pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<ClassIndex>(rng.below(labels));
      truth[i] = static_cast<ClassIndex>(rng.below(labels));
    }
    std::vector<ClassIndex> perm(labels);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    Labels p2(n), t2(n);
    for (std::size_t i = 0; i < n; ++i) {
      p2[i] = perm[pred[i]];
      t2[i] = perm[truth[i]];
    }
    CHECK(accuracy(p2, t2) == accuracy(pred, truth));
  }
}

TEST_CASE("F1 mode selection") {
  CHECK(resolve_f1_mode(F1Mode::kAuto, 2) == F1Mode::kBinaryPositive);
  CHECK(resolve_f1_mode(F1Mode::kAuto, 3) == F1Mode::kMicro);
  CHECK(resolve_f1_mode(F1Mode::kMicro, 2) == F1Mode::kMicro);
  CHECK(parse_f1_mode("binary") == F1Mode::kBinaryPositive);
  CHECK_THROWS_AS(parse_f1_mode("macro"), ConfigError);
}

TEST_CASE("per-class precision and recall") {
  auto s = score_predictions(Labels{0, 0, 1, 2}, Labels{0, 1, 1, 1}, 3);
  CHECK(s.precision[0] == 0.5);
  CHECK(s.recall[0] == 1.0);
  CHECK(s.precision[1] == 1.0);
  CHECK(s.recall[1] == doctest::Approx(1.0 / 3.0));
  CHECK(s.precision[2] == 0.0);
  CHECK(s.recall[2] == 0.0);
  CHECK(s.n_test == 4);
}

TEST_CASE("mean and sample standard deviation") {
  std::vector<double> one{0.9};
  CHECK(mean_std(one).stddev == 0.0);
  std::vector<double> v{1, 2, 3, 4};
  CHECK(mean_std(v).mean == 2.5);
  CHECK(mean_std(v).stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("report summary, JSON and table") {
  RunScores a = score_predictions(Labels{0, 1, 1}, Labels{0, 1, 0}, 2);
  RunScores b = score_predictions(Labels{0, 1, 1}, Labels{0, 1, 1}, 2);
  a.epsilon = b.epsilon = 4.0;
  auto r = summarize("toy", {"neg", "pos"}, F1Mode::kAuto, {a, b});
  CHECK(r.repeats() == 2);
  CHECK(r.accuracy.mean == doctest::Approx((2.0 / 3.0 + 1.0) / 2));
  CHECK(r.accuracy.stddev > 0);
  CHECK(r.f1_mode == F1Mode::kBinaryPositive);
  auto j = r.to_json();
  CHECK(j["dataset"] == "toy");
  CHECK(j["per_class"].size() == 2);
  CHECK(j["epsilon"] == 4.0);
  CHECK(j["runs"].size() == 2);
  auto table = r.to_table();
  CHECK(table.find("accuracy") != std::string::npos);
  CHECK(table.find("pos") != std::string::npos);
  CHECK_THROWS_AS(summarize("x", {"a", "b"}, F1Mode::kAuto, {}), ConfigError);
}

TEST_CASE("repeat_experiment is deterministic") {
  auto data = testing::blobs(300, 5, 2, 3);
  ExperimentOptions o;
  o.session.trees = 3;
  o.session.max_depth = 6;
  o.repeats = 1;
  auto single = repeat_experiment(o, data);
  CHECK(single.accuracy.stddev == 0.0);
  CHECK(single.n_test == 60);
  o.repeats = 3;
  auto a = repeat_experiment(o, data);
  auto b = repeat_experiment(o, data);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.runs[0].accuracy == single.runs[0].accuracy);
  CHECK(std::isinf(a.epsilon));
  CHECK(a.accuracy.mean > 0.5);
  o.repeats = 0;
  CHECK_THROWS_AS(repeat_experiment(o, data), ConfigError);
}
