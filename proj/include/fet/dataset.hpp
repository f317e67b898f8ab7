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
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fet {

using ClassIndex = std::uint32_t;

enum class FeatureKind { kNumeric, kCategorical };

struct FeatureMeta {
  std::string name;
  std::size_t index = 0;
  FeatureKind kind = FeatureKind::kNumeric;
  // Decoding table for categorical features: code i <-> categories[i].
  std::vector<std::string> categories;

  bool operator==(const FeatureMeta&) const = default;
};

struct LabelSpace {
  std::vector<std::string> classes;

  std::size_t size() const { return classes.size(); }
  std::optional<ClassIndex> find(std::string_view name) const;
  bool operator==(const LabelSpace&) const = default;
};

// Column layout shared by every shard of a session.
struct Schema {
  std::vector<FeatureMeta> features;
  LabelSpace labels;

  std::size_t feature_count() const { return features.size(); }
  std::size_t label_count() const { return labels.size(); }
  bool operator==(const Schema&) const = default;
};

/// Rows and integer labels held by one participant. Values are stored
/// row-major; categorical features are already ordinal codes.
class DataShard {
 public:
  DataShard() = default;
  explicit DataShard(std::shared_ptr<const Schema> schema, int client_id = 0);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t feature_count() const { return schema_ ? schema_->feature_count() : 0; }
  std::size_t label_count() const { return schema_ ? schema_->label_count() : 0; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * feature_count(), feature_count()};
  }
  double value(std::size_t i, std::size_t feature) const { return values_[i * feature_count() + feature]; }
  ClassIndex label(std::size_t i) const { return labels_[i]; }
  std::span<const ClassIndex> labels() const { return labels_; }

  void add_row(std::span<const double> row, ClassIndex label);
  void reserve(std::size_t rows);

  // Rows at `indices`, in that order.
  DataShard select(std::span<const std::size_t> indices) const;

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }
  int client_id() const { return client_id_; }
  void set_client_id(int id) { client_id_ = id; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<double> values_;
  std::vector<ClassIndex> labels_;
  int client_id_ = 0;
};

struct CsvOptions {
  // Header name of the label column; a 0-based index when there is no
  // header. Empty selects the last column.
  std::string label_column;
  bool has_header = true;
  // Columns (names, or indices without a header) holding categorical values.
  std::vector<std::string> categorical;
  // Fixed class order. Empty means sorted, numerically when every name is a number.
  std::vector<std::string> classes;
};

DataShard load_csv(const std::filesystem::path& path, const CsvOptions& options);
DataShard parse_csv(std::istream& in, const CsvOptions& options, std::string_view source = "<stream>");

// Feature rows for inference, encoded with `schema`. Columns are matched to
// features by header name when possible, otherwise by position after
// dropping the label column (options.label_column, default last) if present.
std::vector<std::vector<double>> load_feature_rows(const std::filesystem::path& path, const Schema& schema,
                                                   const CsvOptions& options);
std::vector<std::vector<double>> parse_feature_rows(std::istream& in, const Schema& schema,
                                                    const CsvOptions& options, std::string_view source = "<stream>");

// Writes a header row and values with enough digits to round-trip exactly.
void write_csv(const DataShard& shard, const std::filesystem::path& path, std::string_view label_column = "class");

std::pair<DataShard, DataShard> split_train_test(const DataShard& shard, double train_fraction, std::uint64_t seed);
std::vector<DataShard> shard_rows(const DataShard& shard, std::size_t clients, std::uint64_t seed);
std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, std::uint64_t seed);
DataShard subsample(const DataShard& shard, double fraction, std::uint64_t seed);
DataShard concat(std::span<const DataShard> shards);

}  // namespace fet
