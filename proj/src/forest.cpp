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

#include "fet/forest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fet/error.hpp"

namespace fet {

const TreeNode& Tree::leaf_for(std::span<const double> row) const {
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    double v = row[static_cast<std::size_t>(node->feature)];
    node = &nodes_[static_cast<std::size_t>(v < node->threshold ? node->left : node->right)];
  }
  return *node;
}

int Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::function<int(std::size_t)> walk = [&](std::size_t i) -> int {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(walk(static_cast<std::size_t>(n.left)), walk(static_cast<std::size_t>(n.right)));
  };
  return walk(0);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

ClassIndex Forest::predict(std::span<const double> row) const {
  if (row.size() != feature_count())
    throw Error("row has " + std::to_string(row.size()) + " features, model expects " +
                std::to_string(feature_count()));
  std::vector<std::size_t> votes(label_count(), 0);
  for (const auto& tree : trees) ++votes[tree.predict(row)];
  return static_cast<ClassIndex>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<ClassIndex> Forest::predict(const DataShard& shard) const {
  std::vector<ClassIndex> out;
  out.reserve(shard.size());
  for (std::size_t i = 0; i < shard.size(); ++i) out.push_back(predict(shard.row(i)));
  return out;
}

double gini(std::span<const double> counts) {
  double n = 0.0;
  for (double c : counts) {
    if (c < 0) throw Error("gini: negative count");
    n += c;
  }
  if (n <= 0.0) return 0.0;
  double sq = 0.0;
  for (double c : counts) sq += (c / n) * (c / n);
  return 1.0 - sq;
}

double gini_gain(std::span<const double> parent, std::span<const double> left, std::span<const double> right) {
  double n = std::accumulate(parent.begin(), parent.end(), 0.0);
  double nl = std::accumulate(left.begin(), left.end(), 0.0);
  double nr = std::accumulate(right.begin(), right.end(), 0.0);
  if (n <= 0.0 || nl <= 0.0 || nr <= 0.0) return 0.0;
  return gini(parent) - (nl / n) * gini(left) - (nr / n) * gini(right);
}

double estimated_gini_gain(std::span<const double> left, std::span<const double> right) {
  std::vector<double> parent(left.size());
  for (std::size_t k = 0; k < left.size(); ++k) parent[k] = left[k] + right[k];
  return std::max(0.0, gini_gain(parent, left, right));
}

SplitCandidate best_split(std::span<const SplitCandidate> scored) {
  if (scored.empty()) throw Error("best_split: no candidates");
  // Equal partitions scored through different count orders can differ in
  // the last bits; those count as ties.
  constexpr double kTie = 1e-14;
  const SplitCandidate* best = &scored.front();
  for (const auto& c : scored) {
    bool tie = std::abs(c.gain - best->gain) <= kTie;
    if ((!tie && c.gain > best->gain) || (tie && c.feature < best->feature)) best = &c;
  }
  return *best;
}

ClassIndex majority_label(std::span<const double> counts) {
  if (counts.empty()) return 0;
  return static_cast<ClassIndex>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

void TreeAssembler::add_split(const std::string& path, std::size_t feature, double threshold) {
  auto [it, inserted] = pending_.try_emplace(path);
  if (!inserted) throw ProtocolError("node '" + path + "' decided twice");
  it->second.feature = feature;
  it->second.threshold = threshold;
}

void TreeAssembler::add_leaf(const std::string& path, std::vector<double> class_counts, ClassIndex majority) {
  auto [it, inserted] = pending_.try_emplace(path);
  if (!inserted) throw ProtocolError("node '" + path + "' decided twice");
  it->second.leaf = true;
  it->second.counts = std::move(class_counts);
  it->second.majority = majority;
}

Tree TreeAssembler::finish() const {
  std::vector<TreeNode> nodes;
  std::function<std::int32_t(const std::string&)> emit = [&](const std::string& path) -> std::int32_t {
    auto it = pending_.find(path);
    if (it == pending_.end()) throw ProtocolError("node '" + path + "' never decided");
    auto index = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    const Decision& d = it->second;
    if (d.leaf) {
      nodes[index].class_counts = d.counts;
      nodes[index].majority = d.majority;
    } else {
      nodes[index].feature = static_cast<int>(d.feature);
      nodes[index].threshold = d.threshold;
      std::int32_t l = emit(path + "L");
      std::int32_t r = emit(path + "R");
      nodes[index].left = l;
      nodes[index].right = r;
    }
    return index;
  };
  emit("");
  return Tree(std::move(nodes));
}

}  // namespace fet
