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

#include <chrono>
#include <thread>

#include "fet/error.hpp"
#include "fet/protocol/transport.hpp"

using namespace fet;
using namespace fet::protocol;
using namespace std::chrono_literals;

TEST_CASE("channel pair delivers in order in both directions") {
  auto [a, b] = make_channel_pair();
  for (std::uint32_t t = 0; t < 5; ++t) a->send({1, TreeBegin{t}});
  b->send({1, SessionEnd{}});
  for (std::uint32_t t = 0; t < 5; ++t) CHECK(b->receive(100ms).as<TreeBegin>().tree == t);
  CHECK(a->receive(100ms).is<SessionEnd>());
}

TEST_CASE("channel receive times out and reports closure") {
  auto [a, b] = make_channel_pair();
  auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(b->receive(50ms), ProtocolError);
  CHECK(std::chrono::steady_clock::now() - start >= 40ms);

  a->send({1, TreeEnd{1}});
  a->close();
  CHECK(b->receive(100ms).is<TreeEnd>());
  CHECK_THROWS_AS(b->receive(1000ms), ProtocolError);
  CHECK_THROWS_AS(b->send({1, SessionEnd{}}), ProtocolError);
}

TEST_CASE("channel wakes a blocked receiver") {
  auto [a, b] = make_channel_pair();
  std::thread sender([&, &a = a] {
    std::this_thread::sleep_for(20ms);
    a->send({9, StopQuery{{0, "R"}}});
  });
  auto m = b->receive(2000ms);
  sender.join();
  CHECK(m.session == 9);
}

TEST_CASE("recording transport logs both directions") {
  auto [a, b] = make_channel_pair();
  Transcript log;
  RecordingTransport rec(*a, 3, log);
  rec.send({1, TreeBegin{0}});
  b->send({1, StopQuery{{0, ""}}});
  rec.receive(100ms);
  REQUIRE(log.size() == 2);
  CHECK(log[0].direction == TranscriptEntry::Direction::kToClient);
  CHECK(log[1].direction == TranscriptEntry::Direction::kToMaster);
  CHECK(log[1].client == 3);
}

TEST_CASE("tcp loopback carries frames") {
  TcpListener listener("127.0.0.1:0");
  REQUIRE(listener.port() != 0);
  std::string address = "127.0.0.1:" + std::to_string(listener.port());
  std::unique_ptr<Transport> server;
  std::thread acceptor([&] { server = listener.accept(2000ms); });
  auto client = tcp_connect(address, 2000ms);
  acceptor.join();
  REQUIRE(server);

  std::vector<double> big(50000, 0.1);
  Message m{5, LeafLabel{{1, "LRLR"}, big, 0}};
  client->send(m);
  client->send({5, SessionEnd{}});
  CHECK(server->receive(2000ms) == m);
  CHECK(server->receive(2000ms).is<SessionEnd>());
  server->send({5, TreeEnd{2}});
  CHECK(client->receive(2000ms).as<TreeEnd>().tree == 2);

  client->close();
  CHECK_THROWS_AS(server->receive(2000ms), ProtocolError);
}

TEST_CASE("tcp connect fails when nobody listens") {
  std::uint16_t port;
  {
    TcpListener probe("127.0.0.1:0");
    port = probe.port();
  }
  auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(tcp_connect("127.0.0.1:" + std::to_string(port), 300ms), ProtocolError);
  CHECK(std::chrono::steady_clock::now() - start < 3s);
  CHECK_THROWS(tcp_connect("no-port-here", 100ms));
}

TEST_CASE("tcp accept times out") {
  TcpListener listener("127.0.0.1:0");
  CHECK_THROWS_AS(listener.accept(50ms), ProtocolError);
}
