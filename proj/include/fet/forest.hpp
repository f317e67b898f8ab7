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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fet/dataset.hpp"

namespace fet {

// Internal nodes have feature >= 0 and child indices; leaves carry the
// (possibly estimated) class counts and the majority class.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> class_counts;
  ClassIndex majority = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Nodes in pre-order; the root is nodes.front().
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  bool empty() const { return nodes_.empty(); }

  // Routes left iff value < threshold.
  const TreeNode& leaf_for(std::span<const double> row) const;
  ClassIndex predict(std::span<const double> row) const { return leaf_for(row).majority; }
  // Edges on the longest root-to-leaf path.
  int depth() const;
  std::size_t leaf_count() const;

  bool operator==(const Tree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct Forest {
  std::shared_ptr<const Schema> schema;
  std::vector<Tree> trees;
  // Snapshot of the session settings the forest was trained with.
  nlohmann::ordered_json training = nlohmann::ordered_json::object();

  std::size_t feature_count() const { return schema ? schema->feature_count() : 0; }
  std::size_t label_count() const { return schema ? schema->label_count() : 0; }

  // Majority vote over trees; ties go to the lowest class index.
  ClassIndex predict(std::span<const double> row) const;
  std::vector<ClassIndex> predict(const DataShard& shard) const;

  // Same splits, thresholds and leaves.
  bool same_trees(const Forest& other) const { return trees == other.trees; }
};

double gini(std::span<const double> counts);
double gini_gain(std::span<const double> parent, std::span<const double> left, std::span<const double> right);
// Gain with parent := left + right and negative values clipped to 0.
double estimated_gini_gain(std::span<const double> left, std::span<const double> right);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

// Maximal gain; ties go to the lowest feature index.
SplitCandidate best_split(std::span<const SplitCandidate> scored);

// Lowest index among the maximal counts.
ClassIndex majority_label(std::span<const double> counts);

/// Builds a Tree from split and leaf decisions addressed by root paths over
/// {L, R}. Master and clients feed it the same decisions and so end up with
/// node-for-node identical trees.
class TreeAssembler {
 public:
  void add_split(const std::string& path, std::size_t feature, double threshold);
  void add_leaf(const std::string& path, std::vector<double> class_counts, ClassIndex majority);
  bool has(const std::string& path) const { return pending_.count(path) != 0; }
  // Throws when any reachable path is still undecided.
  Tree finish() const;

 private:
  struct Decision {
    bool leaf = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::vector<double> counts;
    ClassIndex majority = 0;
  };
  std::map<std::string, Decision> pending_;
};

// Model file, version 1.
inline constexpr int kModelVersion = 1;
std::string dump_model(const Forest& forest);
Forest parse_model(std::string_view text);
void save_model(const Forest& forest, const std::filesystem::path& path);
Forest load_model(const std::filesystem::path& path);

nlohmann::ordered_json schema_to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& j);

}  // namespace fet
