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

#include "fet/protocol/messages.hpp"

#include <array>
#include <type_traits>

#include "fet/error.hpp"
#include "fet/forest.hpp"

namespace fet::protocol {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

template <class>
inline constexpr bool kAlwaysFalse = false;

ojson node_json(const NodeId& id) { return ojson{{"tree", id.tree}, {"path", id.path}}; }

NodeId node_from(const json& j) {
  NodeId id{j.at("tree").get<std::uint32_t>(), j.at("path").get<std::string>()};
  for (char c : id.path)
    if (c != 'L' && c != 'R') throw ProtocolError("bad node path '" + id.path + "'");
  return id;
}

ojson aggregate_json(const LabelAggregate& a) {
  if (const auto* counts = std::get_if<std::vector<double>>(&a)) return ojson{{"counts", *counts}};
  const auto& bits = std::get<BitCountVector>(a);
  return ojson{{"n", bits.n}, {"sums", bits.sums}};
}

LabelAggregate aggregate_from(const json& j) {
  if (j.contains("counts")) return j.at("counts").get<std::vector<double>>();
  BitCountVector v;
  v.n = j.at("n").get<std::uint64_t>();
  v.sums = j.at("sums").get<std::vector<std::uint64_t>>();
  return v;
}

struct Encoder {
  ojson& j;

  void operator()(const ClientHello& m) const {
    j["client_id"] = m.client_id;
    j["rows"] = m.rows;
    j["feature_count"] = m.feature_count;
    j["label_count"] = m.label_count;
    j["schema"] = schema_to_json(m.schema);
  }
  void operator()(const TreeBegin& m) const { j["tree"] = m.tree; }
  void operator()(const FeatureCandidates& m) const {
    j["node"] = node_json(m.node);
    j["features"] = m.features;
  }
  void operator()(const RangeProposal& m) const {
    j["node"] = node_json(m.node);
    ojson ranges = ojson::array();
    for (const auto& r : m.ranges) {
      ojson e{{"f", r.feature}};
      e["v"] = r.value ? ojson(*r.value) : ojson(nullptr);
      e["degenerate"] = r.degenerate;
      ranges.push_back(std::move(e));
    }
    j["ranges"] = std::move(ranges);
  }
  void operator()(const ThresholdBroadcast& m) const {
    j["node"] = node_json(m.node);
    ojson t = ojson::array();
    for (const auto& e : m.thresholds) t.push_back(ojson{{"f", e.feature}, {"t", e.threshold}});
    j["thresholds"] = std::move(t);
  }
  void operator()(const SplitCounts& m) const {
    j["node"] = node_json(m.node);
    ojson s = ojson::array();
    for (const auto& e : m.splits)
      s.push_back(ojson{{"f", e.feature}, {"left", aggregate_json(e.left)}, {"right", aggregate_json(e.right)}});
    j["splits"] = std::move(s);
  }
  void operator()(const BestSplit& m) const {
    j["node"] = node_json(m.node);
    j["f"] = m.feature;
    j["t"] = m.threshold;
  }
  void operator()(const StopQuery& m) const { j["node"] = node_json(m.node); }
  void operator()(const LeafCounts& m) const {
    j["node"] = node_json(m.node);
    j["counts"] = aggregate_json(m.counts);
  }
  void operator()(const LeafLabel& m) const {
    j["node"] = node_json(m.node);
    j["class_counts"] = m.class_counts;
    j["majority"] = m.majority;
  }
  void operator()(const TreeEnd& m) const { j["tree"] = m.tree; }
  void operator()(const SessionEnd&) const {}
  void operator()(const ErrorMessage& m) const {
    j["code"] = static_cast<int>(m.code);
    j["detail"] = m.detail;
  }
};

Body decode_body(std::string_view type, const json& j) {
  if (type == "ClientHello") {
    ClientHello m;
    m.client_id = j.at("client_id").get<int>();
    m.rows = j.at("rows").get<std::uint64_t>();
    m.feature_count = j.at("feature_count").get<std::size_t>();
    m.label_count = j.at("label_count").get<std::size_t>();
    m.schema = schema_from_json(j.at("schema"));
    return m;
  }
  if (type == "TreeBegin") return TreeBegin{j.at("tree").get<std::uint32_t>()};
  if (type == "FeatureCandidates")
    return FeatureCandidates{node_from(j.at("node")), j.at("features").get<std::vector<std::size_t>>()};
  if (type == "RangeProposal") {
    RangeProposal m{node_from(j.at("node")), {}};
    for (const auto& e : j.at("ranges")) {
      RangeEntry r;
      r.feature = e.at("f").get<std::size_t>();
      if (!e.at("v").is_null()) r.value = e.at("v").get<double>();
      r.degenerate = e.at("degenerate").get<bool>();
      m.ranges.push_back(r);
    }
    return m;
  }
  if (type == "ThresholdBroadcast") {
    ThresholdBroadcast m{node_from(j.at("node")), {}};
    for (const auto& e : j.at("thresholds"))
      m.thresholds.push_back({e.at("f").get<std::size_t>(), e.at("t").get<double>()});
    return m;
  }
  if (type == "SplitCounts") {
    SplitCounts m{node_from(j.at("node")), {}};
    for (const auto& e : j.at("splits"))
      m.splits.push_back({e.at("f").get<std::size_t>(), aggregate_from(e.at("left")), aggregate_from(e.at("right"))});
    return m;
  }
  if (type == "BestSplit")
    return BestSplit{node_from(j.at("node")), j.at("f").get<std::size_t>(), j.at("t").get<double>()};
  if (type == "StopQuery") return StopQuery{node_from(j.at("node"))};
  if (type == "LeafCounts") return LeafCounts{node_from(j.at("node")), aggregate_from(j.at("counts"))};
  if (type == "LeafLabel")
    return LeafLabel{node_from(j.at("node")), j.at("class_counts").get<std::vector<double>>(),
                     j.at("majority").get<ClassIndex>()};
  if (type == "TreeEnd") return TreeEnd{j.at("tree").get<std::uint32_t>()};
  if (type == "SessionEnd") return SessionEnd{};
  if (type == "Error") return ErrorMessage{static_cast<ErrorCode>(j.at("code").get<int>()), j.at("detail").get<std::string>()};
  throw ProtocolError("unknown message type '" + std::string(type) + "'");
}

}  // namespace

std::string_view type_name(const Body& body) {
  return std::visit(
      [](const auto& m) -> std::string_view {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ClientHello>) return "ClientHello";
        else if constexpr (std::is_same_v<T, TreeBegin>) return "TreeBegin";
        else if constexpr (std::is_same_v<T, FeatureCandidates>) return "FeatureCandidates";
        else if constexpr (std::is_same_v<T, RangeProposal>) return "RangeProposal";
        else if constexpr (std::is_same_v<T, ThresholdBroadcast>) return "ThresholdBroadcast";
        else if constexpr (std::is_same_v<T, SplitCounts>) return "SplitCounts";
        else if constexpr (std::is_same_v<T, BestSplit>) return "BestSplit";
        else if constexpr (std::is_same_v<T, StopQuery>) return "StopQuery";
        else if constexpr (std::is_same_v<T, LeafCounts>) return "LeafCounts";
        else if constexpr (std::is_same_v<T, LeafLabel>) return "LeafLabel";
        else if constexpr (std::is_same_v<T, TreeEnd>) return "TreeEnd";
        else if constexpr (std::is_same_v<T, SessionEnd>) return "SessionEnd";
        else if constexpr (std::is_same_v<T, ErrorMessage>) return "Error";
        else static_assert(kAlwaysFalse<T>);
      },
      body);
}

ojson to_json(const Message& msg) {
  ojson j;
  j["type"] = type_name(msg.body);
  j["session"] = msg.session;
  std::visit(Encoder{j}, msg.body);
  return j;
}

Message from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("type")) throw ProtocolError("message without a type tag");
    Message m;
    m.session = j.at("session").get<std::uint64_t>();
    m.body = decode_body(j.at("type").get<std::string>(), j);
    return m;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  } catch (const IoError& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
}

std::string frame_encode(const Message& msg) {
  std::string body = to_json(msg).dump();
  if (body.size() > kMaxFrameBytes) throw ProtocolError("frame exceeds 16 MiB");
  auto len = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(4 + body.size());
  out.push_back(static_cast<char>((len >> 24) & 0xff));
  out.push_back(static_cast<char>((len >> 16) & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out.push_back(static_cast<char>(len & 0xff));
  out += body;
  return out;
}

std::size_t frame_length(std::span<const unsigned char, 4> header) {
  std::size_t len = (std::size_t{header[0]} << 24) | (std::size_t{header[1]} << 16) | (std::size_t{header[2]} << 8) |
                    std::size_t{header[3]};
  if (len > kMaxFrameBytes) throw ProtocolError("frame of " + std::to_string(len) + " bytes exceeds 16 MiB");
  return len;
}

Message frame_decode(std::string_view bytes) {
  if (bytes.size() < 4) throw ProtocolError("truncated frame header");
  std::array<unsigned char, 4> header{};
  for (int i = 0; i < 4; ++i) header[i] = static_cast<unsigned char>(bytes[i]);
  std::size_t len = frame_length(header);
  if (bytes.size() - 4 < len) throw ProtocolError("truncated frame: expected " + std::to_string(len) + " body bytes");
  if (bytes.size() - 4 > len) throw ProtocolError("trailing bytes after frame");
  json j;
  try {
    j = json::parse(bytes.substr(4));
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed frame JSON: ") + e.what());
  }
  return from_json(j);
}

}  // namespace fet::protocol
