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

#include "fet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "fet/error.hpp"
#include "fet/random.hpp"

namespace fet {

std::optional<ClassIndex> LabelSpace::find(std::string_view name) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == name) return static_cast<ClassIndex>(i);
  return std::nullopt;
}

DataShard::DataShard(std::shared_ptr<const Schema> schema, int client_id)
    : schema_(std::move(schema)), client_id_(client_id) {}

void DataShard::add_row(std::span<const double> row, ClassIndex label) {
  if (row.size() != feature_count())
    throw Error("row has " + std::to_string(row.size()) + " values, expected " + std::to_string(feature_count()));
  if (label >= label_count()) throw Error("label index " + std::to_string(label) + " out of range");
  values_.insert(values_.end(), row.begin(), row.end());
  labels_.push_back(label);
}

void DataShard::reserve(std::size_t rows) {
  values_.reserve(rows * feature_count());
  labels_.reserve(rows);
}

DataShard DataShard::select(std::span<const std::size_t> indices) const {
  DataShard out(schema_, client_id_);
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw Error("row index out of range");
    out.add_row(row(i), labels_[i]);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool read_record(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) return true;
  }
  return false;
}

// Resolves a column reference (header name or numeric index) to a position.
std::optional<std::size_t> resolve_column(std::string_view ref, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == ref) return i;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
  if (ec == std::errc() && ptr == ref.data() + ref.size() && idx < header.size()) return idx;
  return std::nullopt;
}

struct Layout {
  std::vector<std::string> header;
  std::size_t label_pos = 0;
  std::vector<std::size_t> feature_pos;
};

Layout make_layout(std::vector<std::string> header, const CsvOptions& options, std::string_view source) {
  Layout layout;
  layout.header = std::move(header);
  if (layout.header.size() < 2) throw IoError(std::string(source) + ": need at least one feature and a label column");
  if (options.label_column.empty()) {
    layout.label_pos = layout.header.size() - 1;
  } else {
    auto pos = resolve_column(options.label_column, layout.header);
    if (!pos) throw IoError(std::string(source) + ": label column '" + options.label_column + "' not found");
    layout.label_pos = *pos;
  }
  for (std::size_t i = 0; i < layout.header.size(); ++i)
    if (i != layout.label_pos) layout.feature_pos.push_back(i);
  return layout;
}

std::vector<std::string> synthetic_header(std::size_t columns) {
  std::vector<std::string> h(columns);
  for (std::size_t i = 0; i < columns; ++i) h[i] = std::to_string(i);
  return h;
}

[[noreturn]] void cell_error(std::string_view source, std::size_t line_no, const std::string& column,
                             std::string_view cell, std::string_view what) {
  std::ostringstream os;
  os << source << ": row " << line_no << ", column '" << column << "': " << what << " '" << cell << "'";
  throw IoError(os.str());
}

}  // namespace

DataShard parse_csv(std::istream& in, const CsvOptions& options, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::string>> pending;
  Layout layout;
  if (options.has_header) {
    if (!read_record(in, line, line_no)) throw IoError(std::string(source) + ": empty dataset");
    layout = make_layout(split_line(line), options, source);
  } else {
    if (!read_record(in, line, line_no)) throw IoError(std::string(source) + ": empty dataset");
    pending.push_back(split_line(line));
    layout = make_layout(synthetic_header(pending.front().size()), options, source);
  }

  auto schema = std::make_shared<Schema>();
  std::vector<bool> categorical(layout.header.size(), false);
  for (const auto& ref : options.categorical) {
    auto pos = resolve_column(ref, layout.header);
    if (!pos) throw IoError(std::string(source) + ": categorical column '" + ref + "' not found");
    categorical[*pos] = true;
  }
  for (std::size_t k = 0; k < layout.feature_pos.size(); ++k) {
    std::size_t pos = layout.feature_pos[k];
    schema->features.push_back(
        {layout.header[pos], k, categorical[pos] ? FeatureKind::kCategorical : FeatureKind::kNumeric, {}});
  }
  const bool fixed_classes = !options.classes.empty();
  schema->labels.classes = options.classes;

  std::vector<std::unordered_map<std::string, double>> codes(layout.feature_pos.size());
  std::vector<double> values;
  std::vector<ClassIndex> labels;
  const std::size_t width = layout.header.size();

  auto consume = [&](const std::vector<std::string>& cells, std::size_t at_line) {
    if (cells.size() != width) {
      std::ostringstream os;
      os << source << ": row " << at_line << " has " << cells.size() << " columns, expected " << width;
      throw IoError(os.str());
    }
    for (std::size_t k = 0; k < layout.feature_pos.size(); ++k) {
      const std::string& cell = cells[layout.feature_pos[k]];
      auto& meta = schema->features[k];
      if (meta.kind == FeatureKind::kCategorical) {
        if (cell.empty()) cell_error(source, at_line, meta.name, cell, "missing value");
        auto [it, inserted] = codes[k].try_emplace(cell, static_cast<double>(meta.categories.size()));
        if (inserted) meta.categories.push_back(cell);
        values.push_back(it->second);
      } else {
        auto v = parse_number(cell);
        if (!v) cell_error(source, at_line, meta.name, cell, "cannot parse number");
        values.push_back(*v);
      }
    }
    const std::string& label = cells[layout.label_pos];
    if (label.empty()) cell_error(source, at_line, layout.header[layout.label_pos], label, "missing label");
    auto idx = schema->labels.find(label);
    if (!idx) {
      if (fixed_classes) cell_error(source, at_line, layout.header[layout.label_pos], label, "unknown class");
      idx = static_cast<ClassIndex>(schema->labels.classes.size());
      schema->labels.classes.push_back(label);
    }
    labels.push_back(*idx);
  };

  for (const auto& cells : pending) consume(cells, line_no);
  while (read_record(in, line, line_no)) consume(split_line(line), line_no);

  if (labels.empty()) throw IoError(std::string(source) + ": empty dataset");
  if (!fixed_classes) {
    // Sorted (numerically when every name is a number) so that shards of one
    // dataset agree on class indices whatever their row order.
    auto& names = schema->labels.classes;
    bool numeric = std::all_of(names.begin(), names.end(), [](const std::string& s) { return parse_number(s); });
    std::vector<ClassIndex> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](ClassIndex a, ClassIndex b) {
      if (numeric) return *parse_number(names[a]) < *parse_number(names[b]);
      return names[a] < names[b];
    });
    std::vector<ClassIndex> remap(names.size());
    std::vector<std::string> sorted;
    for (std::size_t i = 0; i < order.size(); ++i) {
      remap[order[i]] = static_cast<ClassIndex>(i);
      sorted.push_back(names[order[i]]);
    }
    names = std::move(sorted);
    for (auto& l : labels) l = remap[l];
  }
  if (schema->labels.size() < 2) {
    spdlog::warn("{}: label column has a single class", source);
    schema->labels.classes.push_back("<absent>");
  }

  DataShard shard(std::move(schema));
  shard.reserve(labels.size());
  const std::size_t f = layout.feature_pos.size();
  for (std::size_t i = 0; i < labels.size(); ++i)
    shard.add_row(std::span<const double>(values.data() + i * f, f), labels[i]);
  return shard;
}

DataShard load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in, options, path.string());
}

std::vector<std::vector<double>> parse_feature_rows(std::istream& in, const Schema& schema, const CsvOptions& options,
                                                    std::string_view source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::size_t> keep;
  std::size_t width = 0;

  auto set_layout = [&](const std::vector<std::string>& header) {
    width = header.size();
    if (width != schema.feature_count() && width != schema.feature_count() + 1) {
      std::ostringstream os;
      os << source << ": expected " << schema.feature_count() << " feature columns (plus an optional label), got "
         << width << " columns";
      throw IoError(os.str());
    }
    if (options.has_header) {
      // Columns named like the model's features, in the model's order.
      for (const auto& f : schema.features) {
        auto it = std::find(header.begin(), header.end(), f.name);
        if (it == header.end()) break;
        keep.push_back(static_cast<std::size_t>(it - header.begin()));
      }
      if (keep.size() == schema.feature_count()) return;
      keep.clear();
    }
    std::optional<std::size_t> drop;
    if (width == schema.feature_count() + 1) {
      drop = options.label_column.empty() ? std::optional(width - 1) : resolve_column(options.label_column, header);
      if (!drop) throw IoError(std::string(source) + ": label column '" + options.label_column + "' not found");
    }
    for (std::size_t i = 0; i < width; ++i)
      if (!drop || i != *drop) keep.push_back(i);
  };

  bool first = true;
  while (read_record(in, line, line_no)) {
    auto cells = split_line(line);
    if (first) {
      first = false;
      set_layout(options.has_header ? cells : synthetic_header(cells.size()));
      if (options.has_header) continue;
    }
    if (cells.size() != width) {
      std::ostringstream os;
      os << source << ": row " << line_no << " has " << cells.size() << " columns, expected " << width;
      throw IoError(os.str());
    }
    std::vector<double> row;
    row.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto& meta = schema.features[k];
      const std::string& cell = cells[keep[k]];
      if (meta.kind == FeatureKind::kCategorical) {
        auto it = std::find(meta.categories.begin(), meta.categories.end(), cell);
        if (it == meta.categories.end()) cell_error(source, line_no, meta.name, cell, "unknown category");
        row.push_back(static_cast<double>(it - meta.categories.begin()));
      } else {
        auto v = parse_number(cell);
        if (!v) cell_error(source, line_no, meta.name, cell, "cannot parse number");
        row.push_back(*v);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<double>> load_feature_rows(const std::filesystem::path& path, const Schema& schema,
                                                   const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_feature_rows(in, schema, options, path.string());
}

void write_csv(const DataShard& shard, const std::filesystem::path& path, std::string_view label_column) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const Schema& schema = shard.schema();
  for (const auto& f : schema.features) out << f.name << ',';
  out << label_column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < shard.size(); ++i) {
    for (std::size_t f = 0; f < shard.feature_count(); ++f) {
      const auto& meta = schema.features[f];
      double v = shard.value(i, f);
      if (meta.kind == FeatureKind::kCategorical) {
        out << meta.categories.at(static_cast<std::size_t>(v));
      } else {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, ptr - buf);
      }
      out << ',';
    }
    out << schema.labels.classes.at(shard.label(i)) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::pair<DataShard, DataShard> split_train_test(const DataShard& shard, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1), got " + std::to_string(train_fraction));
  const std::size_t n = shard.size();
  if (n < 2) throw Error("split_train_test needs at least 2 rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  std::span<const std::size_t> all(perm);
  return {shard.select(all.first(n_train)), shard.select(all.subspan(n_train))};
}

std::vector<DataShard> shard_rows(const DataShard& shard, std::size_t clients, std::uint64_t seed) {
  const std::size_t n = shard.size();
  if (clients < 1) throw ConfigError("client count must be >= 1");
  if (clients > n)
    throw ConfigError("cannot deal " + std::to_string(n) + " rows to " + std::to_string(clients) + " clients");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());
  std::vector<DataShard> out;
  out.reserve(clients);
  std::size_t begin = 0;
  for (std::size_t c = 0; c < clients; ++c) {
    std::size_t len = n / clients + (c < n % clients ? 1 : 0);
    out.push_back(shard.select(std::span<const std::size_t>(perm).subspan(begin, len)));
    out.back().set_client_id(static_cast<int>(c));
    begin += len;
  }
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("subsample_fraction must lie in (0, 1], got " + std::to_string(fraction));
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  k = std::min(k, n);
  Rng rng(seed);
  return rng.sample_without_replacement(n, k);
}

DataShard subsample(const DataShard& shard, double fraction, std::uint64_t seed) {
  auto idx = subsample_indices(shard.size(), fraction, seed);
  return shard.select(idx);
}

DataShard concat(std::span<const DataShard> shards) {
  if (shards.empty()) return {};
  DataShard out(shards.front().schema_ptr(), shards.front().client_id());
  for (const auto& s : shards) {
    if (s.schema() != out.schema()) throw Error("concat: schema mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) out.add_row(s.row(i), s.label(i));
  }
  return out;
}

}  // namespace fet
