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

#include <cmath>
#include <limits>

#include "fet/error.hpp"
#include "fet/protocol/messages.hpp"
#include "fet/random.hpp"
#include "test_util.hpp"

using namespace fet;
using namespace fet::protocol;

namespace {

std::vector<Message> one_of_each() {
  NodeId node{3, "LRL"};
  BitCountVector bits{{1, 2, 3, 4}, 9};
  return {
      {1, ClientHello{1, 120, 2, 3, *testing::numeric_schema(2, 3)}},
      {1, TreeBegin{4}},
      {1, FeatureCandidates{node, {0, 5, 9}}},
      {1, RangeProposal{node, {{0, 0.25, false}, {5, 3.0, true}, {9, std::nullopt, true}}}},
      {1, ThresholdBroadcast{node, {{0, 0.125}, {9, -7.5}}}},
      {1, SplitCounts{node, {{0, std::vector<double>{1.5, -0.25}, std::vector<double>{0, 2}}, {9, bits, bits}}}},
      {1, BestSplit{node, 9, -7.5}},
      {1, StopQuery{node}},
      {1, LeafCounts{node, bits}},
      {1, LeafCounts{node, std::vector<double>{4, 0, 1}}},
      {1, LeafLabel{node, {4, 0, 1}, 0}},
      {1, TreeEnd{4}},
      {1, SessionEnd{}},
      {1, ErrorMessage{ErrorCode::kUnknownNode, "no such node"}},
  };
}

}  // namespace

TEST_CASE("every message type survives a frame round trip") {
  for (const auto& m : one_of_each()) {
    CAPTURE(type_name(m.body));
    auto frame = frame_encode(m);
    CHECK(frame_decode(frame) == m);
    CHECK(from_json(nlohmann::json::parse(to_json(m).dump())) == m);
  }
}

TEST_CASE("ThresholdBroadcast golden frame") {
  Message m{7, ThresholdBroadcast{{2, "LR"}, {{3, 0.5}, {0, -1.25}}}};
  const std::string body =
      R"({"type":"ThresholdBroadcast","session":7,"node":{"tree":2,"path":"LR"},)"
      R"("thresholds":[{"f":3,"t":0.5},{"f":0,"t":-1.25}]})";
  std::string expected("\x00\x00\x00\x78", 4);
  expected += body;
  CHECK(frame_encode(m) == expected);
}

TEST_CASE("thresholds keep every bit of the double") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    double t = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(40)) - 20);
    Message m{1, BestSplit{{0, ""}, 1, t}};
    CHECK(frame_decode(frame_encode(m)).as<BestSplit>().threshold == t);
  }
  Message tiny{1, BestSplit{{0, ""}, 1, std::numeric_limits<double>::denorm_min()}};
  CHECK(frame_decode(frame_encode(tiny)) == tiny);
}

TEST_CASE("frame decoding rejects damaged input") {
  auto frame = frame_encode(Message{1, StopQuery{{0, "L"}}});
  CHECK_THROWS_AS(frame_decode(frame.substr(0, 3)), ProtocolError);
  CHECK_THROWS_AS(frame_decode(frame.substr(0, frame.size() - 1)), ProtocolError);
  CHECK_THROWS_AS(frame_decode(frame + "x"), ProtocolError);

  auto with_body = [](const std::string& body) {
    std::string f(4, '\0');
    auto n = body.size();
    f[2] = static_cast<char>(n >> 8);
    f[3] = static_cast<char>(n & 0xff);
    return f + body;
  };
  CHECK_THROWS_AS(frame_decode(with_body("{oops")), ProtocolError);
  CHECK_THROWS_AS(frame_decode(with_body(R"({"type":"Gossip","session":1})")), ProtocolError);
  CHECK_THROWS_AS(frame_decode(with_body(R"({"session":1})")), ProtocolError);
  CHECK_THROWS_AS(frame_decode(with_body(R"({"type":"StopQuery","session":1})")), ProtocolError);
  CHECK_THROWS_AS(frame_decode(with_body(R"({"type":"StopQuery","session":1,"node":{"tree":0,"path":"LX"}})")),
                  ProtocolError);

  const unsigned char huge[4] = {0x01, 0x00, 0x00, 0x01};
  CHECK_THROWS_AS(frame_length(std::span<const unsigned char, 4>(huge)), ProtocolError);
  const unsigned char ok[4] = {0x00, 0x00, 0x01, 0x00};
  CHECK(frame_length(std::span<const unsigned char, 4>(ok)) == 256);
}

TEST_CASE("node ids") {
  NodeId root{5, ""};
  CHECK(root.depth() == 0);
  CHECK(root.child(false).path == "L");
  CHECK(root.child(true).child(false).path == "RL");
  CHECK(root.child(true).depth() == 1);
  CHECK(root.child(true).str() == "5:R");
  CHECK(root.child(false) != root.child(true));
}
