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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fet/dataset.hpp"
#include "fet/ldp.hpp"

namespace fet::protocol {

// Tree index plus the root path over {L, R}. Master and clients derive the
// same ids because they recurse in lockstep, left before right.
struct NodeId {
  std::uint32_t tree = 0;
  std::string path;

  NodeId child(bool right) const { return {tree, path + (right ? 'R' : 'L')}; }
  int depth() const { return static_cast<int>(path.size()); }
  std::string str() const { return std::to_string(tree) + ":" + path; }
  auto operator<=>(const NodeId&) const = default;
};

// Class-count vector (no privacy, or Laplace-perturbed under GDP) or
// instant-RR bit sums (LDP).
using LabelAggregate = std::variant<std::vector<double>, BitCountVector>;

struct RangeEntry {
  std::size_t feature = 0;
  // Interior draw; for degenerate entries the constant local value, or
  // nothing when the client holds no rows at the node.
  std::optional<double> value;
  bool degenerate = false;
  bool operator==(const RangeEntry&) const = default;
};

struct FeatureThreshold {
  std::size_t feature = 0;
  double threshold = 0.0;
  bool operator==(const FeatureThreshold&) const = default;
};

struct SideCounts {
  std::size_t feature = 0;
  LabelAggregate left;
  LabelAggregate right;
  bool operator==(const SideCounts&) const = default;
};

struct ClientHello {
  int client_id = 0;
  std::uint64_t rows = 0;
  std::size_t feature_count = 0;
  std::size_t label_count = 0;
  // Column names, kinds and class names; no data values.
  Schema schema;
  bool operator==(const ClientHello&) const = default;
};
struct TreeBegin {
  std::uint32_t tree = 0;
  bool operator==(const TreeBegin&) const = default;
};
struct FeatureCandidates {
  NodeId node;
  std::vector<std::size_t> features;
  bool operator==(const FeatureCandidates&) const = default;
};
struct RangeProposal {
  NodeId node;
  std::vector<RangeEntry> ranges;
  bool operator==(const RangeProposal&) const = default;
};
struct ThresholdBroadcast {
  NodeId node;
  std::vector<FeatureThreshold> thresholds;
  bool operator==(const ThresholdBroadcast&) const = default;
};
struct SplitCounts {
  NodeId node;
  std::vector<SideCounts> splits;
  bool operator==(const SplitCounts&) const = default;
};
struct BestSplit {
  NodeId node;
  std::size_t feature = 0;
  double threshold = 0.0;
  bool operator==(const BestSplit&) const = default;
};
struct StopQuery {
  NodeId node;
  bool operator==(const StopQuery&) const = default;
};
struct LeafCounts {
  NodeId node;
  LabelAggregate counts;
  bool operator==(const LeafCounts&) const = default;
};
struct LeafLabel {
  NodeId node;
  std::vector<double> class_counts;
  ClassIndex majority = 0;
  bool operator==(const LeafLabel&) const = default;
};
struct TreeEnd {
  std::uint32_t tree = 0;
  bool operator==(const TreeEnd&) const = default;
};
struct SessionEnd {
  bool operator==(const SessionEnd&) const = default;
};

enum class ErrorCode : int {
  kSchemaMismatch = 1,
  kUnknownNode = 2,
  kOutOfOrder = 3,
  kTimeout = 4,
  kDisconnected = 5,
  kInternal = 6,
};

struct ErrorMessage {
  ErrorCode code = ErrorCode::kInternal;
  std::string detail;
  bool operator==(const ErrorMessage&) const = default;
};

using Body = std::variant<ClientHello, TreeBegin, FeatureCandidates, RangeProposal, ThresholdBroadcast, SplitCounts,
                          BestSplit, StopQuery, LeafCounts, LeafLabel, TreeEnd, SessionEnd, ErrorMessage>;

struct Message {
  std::uint64_t session = 0;
  Body body;

  template <class T>
  bool is() const { return std::holds_alternative<T>(body); }
  template <class T>
  const T& as() const { return std::get<T>(body); }
  bool operator==(const Message&) const = default;
};

// Wire tag of the message body, e.g. "ThresholdBroadcast".
std::string_view type_name(const Body& body);

nlohmann::ordered_json to_json(const Message& msg);
Message from_json(const nlohmann::json& j);

inline constexpr std::size_t kMaxFrameBytes = 16u << 20;

// 4-byte big-endian length prefix followed by the UTF-8 JSON body.
std::string frame_encode(const Message& msg);
// Decodes exactly one complete frame. Throws ProtocolError on truncation,
// oversize frames, malformed JSON or an unknown type tag.
Message frame_decode(std::string_view bytes);
// Body length announced by a 4-byte header; throws when over the cap.
std::size_t frame_length(std::span<const unsigned char, 4> header);

}  // namespace fet::protocol
