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

#include <fstream>
#include <sstream>

#include "fet/error.hpp"
#include "fet/forest.hpp"

namespace fet {

using ojson = nlohmann::ordered_json;

namespace {

ojson node_to_json(const Tree& tree, std::size_t index) {
  const TreeNode& n = tree.nodes()[index];
  ojson j;
  if (n.is_leaf()) {
    j["leaf"] = n.class_counts;
    j["y"] = n.majority;
  } else {
    j["f"] = n.feature;
    j["t"] = n.threshold;
    j["l"] = node_to_json(tree, static_cast<std::size_t>(n.left));
    j["r"] = node_to_json(tree, static_cast<std::size_t>(n.right));
  }
  return j;
}

void node_from_json(const ojson& j, std::vector<TreeNode>& out, const Schema& schema, int depth) {
  if (depth > 4096) throw IoError("model: tree too deep");
  if (!j.is_object()) throw IoError("model: node is not an object");
  auto index = out.size();
  out.emplace_back();
  if (j.contains("leaf")) {
    auto counts = j.at("leaf").get<std::vector<double>>();
    auto y = j.at("y").get<ClassIndex>();
    if (counts.size() != schema.label_count() || y >= schema.label_count())
      throw IoError("model: leaf does not match the label space");
    out[index].class_counts = std::move(counts);
    out[index].majority = y;
    return;
  }
  int f = j.at("f").get<int>();
  if (f < 0 || static_cast<std::size_t>(f) >= schema.feature_count()) throw IoError("model: feature index out of range");
  out[index].feature = f;
  out[index].threshold = j.at("t").get<double>();
  out[index].left = static_cast<std::int32_t>(out.size());
  node_from_json(j.at("l"), out, schema, depth + 1);
  out[index].right = static_cast<std::int32_t>(out.size());
  node_from_json(j.at("r"), out, schema, depth + 1);
}

}  // namespace

ojson schema_to_json(const Schema& schema) {
  ojson features = ojson::array();
  for (const auto& f : schema.features) {
    ojson e;
    e["name"] = f.name;
    e["kind"] = f.kind == FeatureKind::kCategorical ? "categorical" : "numeric";
    if (f.kind == FeatureKind::kCategorical) e["categories"] = f.categories;
    features.push_back(std::move(e));
  }
  ojson j;
  j["label_space"] = schema.labels.classes;
  j["features"] = std::move(features);
  return j;
}

Schema schema_from_json(const nlohmann::json& j) {
  Schema schema;
  schema.labels.classes = j.at("label_space").get<std::vector<std::string>>();
  std::size_t index = 0;
  for (const auto& e : j.at("features")) {
    FeatureMeta meta;
    meta.name = e.at("name").get<std::string>();
    meta.index = index++;
    auto kind = e.at("kind").get<std::string>();
    if (kind == "categorical") {
      meta.kind = FeatureKind::kCategorical;
      meta.categories = e.at("categories").get<std::vector<std::string>>();
    } else if (kind != "numeric") {
      throw IoError("unknown feature kind '" + kind + "'");
    }
    schema.features.push_back(std::move(meta));
  }
  if (schema.labels.size() < 2) throw IoError("label space needs at least 2 classes");
  return schema;
}

std::string dump_model(const Forest& forest) {
  ojson j;
  j["version"] = kModelVersion;
  ojson schema = schema_to_json(*forest.schema);
  j["label_space"] = std::move(schema["label_space"]);
  j["features"] = std::move(schema["features"]);
  ojson trees = ojson::array();
  for (const auto& t : forest.trees) trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  j["training"] = forest.training;
  return j.dump() + "\n";
}

Forest parse_model(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model: corrupt file: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("version")) throw IoError("model: missing version tag");
    int version = j.at("version").get<int>();
    if (version != kModelVersion)
      throw IoError("model: unsupported version " + std::to_string(version) + " (expected " +
                    std::to_string(kModelVersion) + ")");
    Forest forest;
    auto schema = std::make_shared<Schema>(schema_from_json(nlohmann::json(j)));
    for (const auto& t : j.at("trees")) {
      std::vector<TreeNode> nodes;
      node_from_json(t, nodes, *schema, 0);
      forest.trees.emplace_back(std::move(nodes));
    }
    if (forest.trees.empty()) throw IoError("model: no trees");
    forest.schema = std::move(schema);
    if (j.contains("training")) forest.training = j.at("training");
    return forest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model: corrupt file: ") + e.what());
  }
}

void save_model(const Forest& forest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_model(forest);
  if (!out) throw IoError("write failed for " + path.string());
}

Forest load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace fet
