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
#include <numeric>
#include <optional>

#include <spdlog/spdlog.h>

#include "fet/error.hpp"
#include "fet/protocol/session.hpp"
#include "fet/random.hpp"

namespace fet::protocol {
namespace {

class Master {
 public:
  Master(const SessionConfig& config, std::span<Transport* const> links)
      : config_(config), links_(links.begin(), links.end()), session_(config.session_id()) {}

  MasterResult run() {
    handshake();
    MasterResult result;
    result.privacy = PrivacyAccountant(config_.privacy, config_.epsilon_node, config_.clients);
    result.forest.schema = schema_;
    result.forest.training = config_.snapshot();
    for (int t = 0; t < config_.trees; ++t) {
      auto tree_index = static_cast<std::uint32_t>(t);
      broadcast(TreeBegin{tree_index});
      rng_.emplace(derive_seed(config_.master_seed, Stream::kMasterTree, tree_index));
      assembler_ = TreeAssembler();
      NodeId root{tree_index, ""};
      broadcast(StopQuery{root});
      LabelCountEstimate estimate = combine(gather_leaf_counts(root));
      build(root, std::move(estimate), true);
      broadcast(TreeEnd{tree_index});
      Tree tree = assembler_.finish();
      result.privacy.record_tree(tree.depth());
      spdlog::debug("tree {} done: {} nodes, depth {}", t, tree.nodes().size(), tree.depth());
      result.forest.trees.push_back(std::move(tree));
    }
    broadcast(SessionEnd{});
    return result;
  }

 private:
  void handshake() {
    std::vector<Transport*> ordered(links_.size(), nullptr);
    std::optional<ClientHello> first;
    for (Transport* link : links_) {
      Message m = receive_from(*link);
      if (!m.is<ClientHello>()) abort(ErrorCode::kOutOfOrder, "expected ClientHello, got " + std::string(type_name(m.body)));
      const auto& hello = m.as<ClientHello>();
      if (hello.client_id < 0 || hello.client_id >= config_.clients || ordered[hello.client_id] != nullptr)
        abort(ErrorCode::kSchemaMismatch, "invalid or duplicate client id " + std::to_string(hello.client_id));
      if (hello.feature_count != hello.schema.feature_count() || hello.label_count != hello.schema.label_count())
        abort(ErrorCode::kSchemaMismatch, "client " + std::to_string(hello.client_id) + " sent an inconsistent hello");
      if (!first) {
        first = hello;
      } else if (hello.feature_count != first->feature_count) {
        abort(ErrorCode::kSchemaMismatch, "client " + std::to_string(hello.client_id) + " has " +
                                              std::to_string(hello.feature_count) + " features, expected " +
                                              std::to_string(first->feature_count));
      } else if (hello.label_count != first->label_count || hello.schema != first->schema) {
        abort(ErrorCode::kSchemaMismatch,
              "client " + std::to_string(hello.client_id) + " has a different label space or feature table");
      }
      ordered[hello.client_id] = link;
    }
    links_ = std::move(ordered);
    schema_ = std::make_shared<const Schema>(first->schema);
    try {
      config_.validate(schema_->feature_count());
    } catch (const ConfigError& e) {
      abort(ErrorCode::kSchemaMismatch, e.what());
    }
    if (config_.privacy == PrivacyMode::kLdp) {
      decoder_.emplace(config_.bloom, config_.rr, schema_->label_count());
      decoder_->lambda_per_sample = config_.ldp_lambda;
      if (!decoder_->full_rank())
        spdlog::warn("Bloom design matrix has rank {} for {} classes; estimates rely on the lasso penalty",
                     decoder_->rank(), schema_->label_count());
    }
    spdlog::info("master: {} clients joined, {} features, {} classes", links_.size(), schema_->feature_count(),
                 schema_->label_count());
  }

  void build(const NodeId& node, LabelCountEstimate estimate, bool estimate_is_leaf_query) {
    NodeState state{node.depth(), estimate, false};
    if (stopping_condition(state, config_)) {
      make_leaf(node, estimate_is_leaf_query ? std::optional(std::move(estimate)) : std::nullopt);
      return;
    }

    const std::size_t feature_count = schema_->feature_count();
    auto candidates = rng_->sample_without_replacement(feature_count, config_.candidates_for(feature_count));
    std::sort(candidates.begin(), candidates.end());
    broadcast(FeatureCandidates{node, candidates});

    auto proposals = gather<RangeProposal>(node);
    std::vector<FeatureThreshold> thresholds;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      std::optional<double> lo, hi;
      for (std::size_t c = 0; c < proposals.size(); ++c) {
        const auto& ranges = proposals[c].ranges;
        if (ranges.size() != candidates.size() || ranges[k].feature != candidates[k])
          abort(ErrorCode::kOutOfOrder, "client " + std::to_string(c) + " answered for the wrong features");
        const RangeEntry& e = ranges[k];
        if (e.degenerate || !e.value) continue;
        lo = lo ? std::min(*lo, *e.value) : *e.value;
        hi = hi ? std::max(*hi, *e.value) : *e.value;
      }
      if (!lo) continue;
      thresholds.push_back({candidates[k], pick_threshold(*lo, *hi)});
    }
    if (thresholds.empty()) {
      make_leaf(node, std::nullopt);
      return;
    }
    broadcast(ThresholdBroadcast{node, thresholds});

    auto counts = gather<SplitCounts>(node);
    std::vector<SplitCandidate> scored;
    std::vector<std::pair<LabelCountEstimate, LabelCountEstimate>> sides;
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      std::vector<LabelAggregate> left, right;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        const auto& splits = counts[c].splits;
        if (splits.size() != thresholds.size() || splits[k].feature != thresholds[k].feature)
          abort(ErrorCode::kOutOfOrder, "client " + std::to_string(c) + " sent counts for the wrong features");
        left.push_back(splits[k].left);
        right.push_back(splits[k].right);
      }
      auto l = combine(left);
      auto r = combine(right);
      scored.push_back({thresholds[k].feature, thresholds[k].threshold, estimated_gini_gain(l.counts, r.counts)});
      sides.emplace_back(std::move(l), std::move(r));
    }
    SplitCandidate best = best_split(scored);
    std::size_t best_index = 0;
    while (scored[best_index].feature != best.feature) ++best_index;

    broadcast(BestSplit{node, best.feature, best.threshold});
    assembler_.add_split(node.path, best.feature, best.threshold);
    build(node.child(false), std::move(sides[best_index].first), false);
    build(node.child(true), std::move(sides[best_index].second), false);
  }

  // Uniform in (lo, hi); a single distinct proposal is used as is, since
  // every proposal is already interior to its client's range.
  double pick_threshold(double lo, double hi) {
    if (!(lo < hi)) return lo;
    for (int attempt = 0; attempt < 64; ++attempt) {
      double v = lo + rng_->uniform_open() * (hi - lo);
      if (v > lo && v < hi) return v;
    }
    return hi;
  }

  void make_leaf(const NodeId& node, std::optional<LabelCountEstimate> known) {
    if (!known) {
      broadcast(StopQuery{node});
      known = combine(gather_leaf_counts(node));
    }
    ClassIndex majority = majority_label(known->counts);
    broadcast(LeafLabel{node, known->counts, majority});
    assembler_.add_leaf(node.path, std::move(known->counts), majority);
  }

  std::vector<LabelAggregate> gather_leaf_counts(const NodeId& node) {
    std::vector<LabelAggregate> out;
    for (auto& m : gather<LeafCounts>(node)) out.push_back(std::move(m.counts));
    return out;
  }

  LabelCountEstimate combine(const std::vector<LabelAggregate>& parts) {
    const std::size_t labels = schema_->label_count();
    if (config_.privacy == PrivacyMode::kLdp) {
      BitCountVector merged = BitCountVector::zero(config_.bloom.bits);
      for (const auto& p : parts) {
        const auto* bits = std::get_if<BitCountVector>(&p);
        if (!bits || bits->sums.size() != config_.bloom.bits) abort(ErrorCode::kOutOfOrder, "expected Bloom bit sums");
        merged += *bits;
      }
      return decoder_->decode(merged);
    }
    LabelCountEstimate est{std::vector<double>(labels, 0.0), 0.0};
    for (const auto& p : parts) {
      const auto* counts = std::get_if<std::vector<double>>(&p);
      if (!counts || counts->size() != labels) abort(ErrorCode::kOutOfOrder, "expected a class-count vector");
      for (std::size_t l = 0; l < labels; ++l) est.counts[l] += (*counts)[l];
    }
    for (auto& c : est.counts) {
      if (config_.privacy == PrivacyMode::kGdp) c = std::max(0.0, c);
      est.n += c;
    }
    return est;
  }

  void broadcast(const Body& body) {
    Message m{session_, body};
    for (std::size_t c = 0; c < links_.size(); ++c) {
      try {
        links_[c]->send(m);
      } catch (const ProtocolError& e) {
        abort(ErrorCode::kDisconnected, "client " + std::to_string(c) + ": " + e.what());
      }
    }
  }

  Message receive_from(Transport& link) {
    Message m;
    try {
      m = link.receive(config_.round_timeout);
    } catch (const ProtocolError& e) {
      abort(ErrorCode::kTimeout, e.what());
    }
    if (m.is<ErrorMessage>()) abort(m.as<ErrorMessage>().code, "client reported: " + m.as<ErrorMessage>().detail);
    if (m.session != session_) abort(ErrorCode::kOutOfOrder, "message from another session");
    return m;
  }

  template <class T>
  std::vector<T> gather(const NodeId& node) {
    std::vector<T> out;
    out.reserve(links_.size());
    for (std::size_t c = 0; c < links_.size(); ++c) {
      Message m = receive_from(*links_[c]);
      if (!m.is<T>())
        abort(ErrorCode::kOutOfOrder, "client " + std::to_string(c) + " sent " + std::string(type_name(m.body)));
      if (m.as<T>().node != node)
        abort(ErrorCode::kUnknownNode, "client " + std::to_string(c) + " answered for node " + m.as<T>().node.str() +
                                           " while master is at " + node.str());
      out.push_back(std::get<T>(std::move(m.body)));
    }
    return out;
  }

  [[noreturn]] void abort(ErrorCode code, const std::string& detail) {
    spdlog::error("master: aborting session: {}", detail);
    Message m{session_, ErrorMessage{code, detail}};
    for (Transport* link : links_) {
      if (!link) continue;
      try {
        link->send(m);
      } catch (const std::exception&) {
      }
    }
    throw ProtocolError(detail);
  }

  SessionConfig config_;
  std::vector<Transport*> links_;
  std::uint64_t session_;
  std::shared_ptr<const Schema> schema_;
  std::optional<CountDecoder> decoder_;
  std::optional<Rng> rng_;
  TreeAssembler assembler_;
};

}  // namespace

MasterResult master_run(const SessionConfig& config, std::span<Transport* const> links) {
  if (links.size() != static_cast<std::size_t>(config.clients))
    throw ConfigError("master has " + std::to_string(links.size()) + " links for " + std::to_string(config.clients) +
                      " clients");
  return Master(config, links).run();
}

}  // namespace fet::protocol
