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

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fet/protocol/messages.hpp"

namespace fet::protocol {

/// A duplex, ordered, lossless message link between the master and one
/// client. A handle may move between threads but is never used by two
/// threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const Message& msg) = 0;
  // Throws ProtocolError on timeout or when the peer has gone away.
  virtual Message receive(std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;
};

// Two connected in-process endpoints backed by FIFO queues.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_channel_pair();

struct TranscriptEntry {
  enum class Direction { kToClient, kToMaster };
  Direction direction;
  int client;
  Message message;
};
using Transcript = std::vector<TranscriptEntry>;

// Logs every message that crosses `inner`, as seen from the master side.
class RecordingTransport : public Transport {
 public:
  RecordingTransport(Transport& inner, int client, Transcript& log) : inner_(inner), client_(client), log_(log) {}

  void send(const Message& msg) override;
  Message receive(std::chrono::milliseconds timeout) override;
  void close() override { inner_.close(); }

 private:
  Transport& inner_;
  int client_;
  Transcript& log_;
};

class TcpListener {
 public:
  // `address` is "host:port"; port 0 picks a free port.
  explicit TcpListener(const std::string& address);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<Transport> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

std::unique_ptr<Transport> tcp_connect(const std::string& address, std::chrono::milliseconds timeout);

}  // namespace fet::protocol
