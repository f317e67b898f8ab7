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

#include <algorithm>
#include <map>
#include <optional>

#include <spdlog/spdlog.h>

#include "fet/error.hpp"
#include "fet/protocol/session.hpp"
#include "fet/random.hpp"

namespace fet::protocol {
namespace {

using RowList = std::vector<std::uint32_t>;

class Client {
 public:
  Client(const SessionConfig& config, const DataShard& shard, int client_id, Transport& link, ClientProbe* probe)
      : config_(config),
        shard_(shard),
        id_(client_id),
        link_(link),
        probe_(probe),
        seed_(config.client_seed(client_id)),
        session_(config.session_id()),
        permanent_(shard.size()) {
    if (config_.privacy == PrivacyMode::kLdp) {
      for (std::size_t l = 0; l < shard_.label_count(); ++l)
        bloom_.push_back(bloom_encode(static_cast<std::uint32_t>(l), config_.bloom));
    }
  }

  ClientResult run() {
    ClientHello hello{id_, shard_.size(), shard_.feature_count(), shard_.label_count(), shard_.schema()};
    send(std::move(hello));
    ClientResult result;
    result.forest.schema = shard_.schema_ptr();
    result.forest.training = config_.snapshot();
    for (;;) {
      Message m;
      try {
        m = link_.receive(config_.round_timeout);
      } catch (const ProtocolError& e) {
        throw ProtocolError("client " + std::to_string(id_) + ": " + e.what());
      }
      if (m.is<ErrorMessage>())
        throw ProtocolError("client " + std::to_string(id_) + ": master aborted: " + m.as<ErrorMessage>().detail);
      if (m.session != session_) fail(ErrorCode::kOutOfOrder, "message from another session");
      if (m.is<SessionEnd>()) {
        if (in_tree_) fail(ErrorCode::kOutOfOrder, "session ended inside a tree");
        break;
      }
      std::visit([&](const auto& body) { handle(body, result); }, m.body);
    }
    result.permanent_encodings = encodings_;
    return result;
  }

 private:
  void handle(const TreeBegin& msg, ClientResult&) {
    if (in_tree_ || msg.tree != next_tree_) fail(ErrorCode::kOutOfOrder, "unexpected TreeBegin");
    in_tree_ = true;
    tree_ = msg.tree;
    auto picked = subsample_indices(shard_.size(), config_.subsample_fraction,
                                    derive_seed(seed_, Stream::kSubsample, tree_));
    RowList rows(picked.begin(), picked.end());
    rows_.clear();
    rows_[""] = std::move(rows);
    range_rng_.emplace(derive_seed(seed_, Stream::kRange, tree_));
    Stream noise = config_.privacy == PrivacyMode::kGdp ? Stream::kLaplace : Stream::kInstant;
    noise_rng_.emplace(derive_seed(seed_, noise, tree_));
    assembler_ = TreeAssembler();
    pending_.reset();
  }

  void handle(const FeatureCandidates& msg, ClientResult&) {
    const RowList& rows = rows_at(msg.node);
    RangeProposal out{msg.node, {}};
    for (std::size_t f : msg.features) {
      if (f >= shard_.feature_count()) fail(ErrorCode::kOutOfOrder, "feature index out of range");
      RangeEntry entry{f, std::nullopt, true};
      double lo = 0, hi = 0;
      if (!rows.empty()) {
        lo = hi = shard_.value(rows.front(), f);
        for (auto r : rows) {
          double v = shard_.value(r, f);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (lo == hi) {
          entry.value = lo;
        } else if (auto v = interior_draw(lo, hi)) {
          entry.value = v;
          entry.degenerate = false;
        }
      }
      if (probe_) probe_->on_range(msg.node, f, lo, hi, entry);
      out.ranges.push_back(entry);
    }
    candidates_ = {msg.node, msg.features};
    send(std::move(out));
  }

  void handle(const ThresholdBroadcast& msg, ClientResult&) {
    const RowList& rows = rows_at(msg.node);
    if (!candidates_ || candidates_->first != msg.node)
      fail(ErrorCode::kOutOfOrder, "thresholds for " + msg.node.str() + " before its candidates");
    const auto& offered = candidates_->second;
    SplitCounts out{msg.node, {}};
    pending_.emplace();
    pending_->node = msg.node;
    for (const auto& ft : msg.thresholds) {
      if (std::find(offered.begin(), offered.end(), ft.feature) == offered.end())
        fail(ErrorCode::kOutOfOrder, "threshold for a feature that was not a candidate");
      Partition part;
      part.threshold = ft.threshold;
      for (auto r : rows) (shard_.value(r, ft.feature) < ft.threshold ? part.left : part.right).push_back(r);
      out.splits.push_back({ft.feature, aggregate(part.left), aggregate(part.right)});
      pending_->parts.emplace(ft.feature, std::move(part));
    }
    send(std::move(out));
  }

  void handle(const BestSplit& msg, ClientResult&) {
    rows_at(msg.node);
    if (!pending_ || pending_->node != msg.node) fail(ErrorCode::kUnknownNode, "no split pending at " + msg.node.str());
    auto it = pending_->parts.find(msg.feature);
    if (it == pending_->parts.end() || it->second.threshold != msg.threshold)
      fail(ErrorCode::kOutOfOrder, "best split was not among the offered thresholds");
    rows_[msg.node.child(false).path] = std::move(it->second.left);
    rows_[msg.node.child(true).path] = std::move(it->second.right);
    rows_.erase(msg.node.path);
    assembler_.add_split(msg.node.path, msg.feature, msg.threshold);
    pending_.reset();
    candidates_.reset();
  }

  void handle(const StopQuery& msg, ClientResult&) { send(LeafCounts{msg.node, aggregate(rows_at(msg.node))}); }

  void handle(const LeafLabel& msg, ClientResult&) {
    rows_at(msg.node);
    if (msg.class_counts.size() != shard_.label_count() || msg.majority >= shard_.label_count())
      fail(ErrorCode::kOutOfOrder, "leaf label does not fit the label space");
    assembler_.add_leaf(msg.node.path, msg.class_counts, msg.majority);
    rows_.erase(msg.node.path);
  }

  void handle(const TreeEnd& msg, ClientResult& result) {
    if (!in_tree_ || msg.tree != tree_) fail(ErrorCode::kOutOfOrder, "unexpected TreeEnd");
    if (!rows_.empty()) fail(ErrorCode::kOutOfOrder, "tree ended with open node " + rows_.begin()->first);
    result.forest.trees.push_back(assembler_.finish());
    in_tree_ = false;
    ++next_tree_;
  }

  template <class T>
  void handle(const T& msg, ClientResult&) {
    fail(ErrorCode::kOutOfOrder, "client received " + std::string(type_name(Body(msg))));
  }

  const RowList& rows_at(const NodeId& node) {
    if (!in_tree_ || node.tree != tree_) fail(ErrorCode::kUnknownNode, "unknown node " + node.str());
    auto it = rows_.find(node.path);
    if (it == rows_.end()) fail(ErrorCode::kUnknownNode, "unknown node " + node.str());
    return it->second;
  }

  std::optional<double> interior_draw(double lo, double hi) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      double v = lo + range_rng_->uniform_open() * (hi - lo);
      if (v > lo && v < hi) return v;
    }
    double mid = lo + (hi - lo) / 2;
    if (mid > lo && mid < hi) return mid;
    return std::nullopt;
  }

  LabelAggregate aggregate(const RowList& rows) {
    const std::size_t labels = shard_.label_count();
    if (config_.privacy == PrivacyMode::kLdp) {
      std::vector<std::uint64_t> ones(config_.bloom.bits, 0);
      for (auto r : rows) {
        const BitString& bits = permanent(r);
        for (std::size_t t = 0; t < bits.size(); ++t) ones[t] += bits[t];
      }
      return instant_rr_sums(ones, rows.size(), config_.rr.xi, config_.rr.zeta, *noise_rng_);
    }
    std::vector<double> counts(labels, 0.0);
    for (auto r : rows) counts[shard_.label(r)] += 1;
    if (config_.privacy == PrivacyMode::kGdp) return laplace_perturb(counts, config_.epsilon_node, *noise_rng_);
    return counts;
  }

  // Memoised for the whole session so repeated queries cannot average the
  // permanent layer away.
  const BitString& permanent(std::uint32_t row) {
    auto& slot = permanent_[row];
    if (!slot) {
      Rng rng(derive_seed(seed_, Stream::kPermanent, row));
      slot = permanent_rr(bloom_[shard_.label(row)], config_.rr.keep, rng);
      ++encodings_;
      if (probe_) probe_->on_permanent_encoding(row);
    }
    return *slot;
  }

  void send(Body body) {
    try {
      link_.send(Message{session_, std::move(body)});
    } catch (const ProtocolError& e) {
      throw ProtocolError("client " + std::to_string(id_) + ": " + e.what());
    }
  }

  [[noreturn]] void fail(ErrorCode code, const std::string& detail) {
    spdlog::error("client {}: {}", id_, detail);
    try {
      link_.send(Message{session_, ErrorMessage{code, detail}});
    } catch (const std::exception&) {
    }
    throw ProtocolError("client " + std::to_string(id_) + ": " + detail);
  }

  struct Partition {
    double threshold = 0;
    RowList left, right;
  };
  struct PendingSplit {
    NodeId node;
    std::map<std::size_t, Partition> parts;
  };

  const SessionConfig& config_;
  const DataShard& shard_;
  int id_;
  Transport& link_;
  ClientProbe* probe_;
  std::uint64_t seed_;
  std::uint64_t session_;
  std::vector<BitString> bloom_;
  std::vector<std::optional<BitString>> permanent_;
  std::size_t encodings_ = 0;

  bool in_tree_ = false;
  std::uint32_t tree_ = 0;
  std::uint32_t next_tree_ = 0;
  std::map<std::string, RowList> rows_;
  std::optional<std::pair<NodeId, std::vector<std::size_t>>> candidates_;
  std::optional<PendingSplit> pending_;
  std::optional<Rng> range_rng_;
  std::optional<Rng> noise_rng_;
  TreeAssembler assembler_;
};

}  // namespace

ClientResult client_run(const SessionConfig& config, const DataShard& shard, int client_id, Transport& link,
                        ClientProbe* probe) {
  if (!shard.schema_ptr()) throw ConfigError("client shard has no schema");
  config.validate(shard.feature_count());
  return Client(config, shard, client_id, link, probe).run();
}

}  // namespace fet::protocol
