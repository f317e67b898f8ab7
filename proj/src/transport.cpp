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

#include <condition_variable>
#include <deque>
#include <mutex>

#include "fet/error.hpp"
#include "fet/protocol/transport.hpp"

namespace fet::protocol {
namespace {

struct Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Message> items;
  bool closed = false;
};

class ChannelEndpoint : public Transport {
 public:
  ChannelEndpoint(std::shared_ptr<Queue> in, std::shared_ptr<Queue> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~ChannelEndpoint() override { close(); }

  void send(const Message& msg) override {
    {
      std::lock_guard lock(out_->mu);
      if (out_->closed) throw ProtocolError("channel closed by peer");
      out_->items.push_back(msg);
    }
    out_->cv.notify_one();
  }

  Message receive(std::chrono::milliseconds timeout) override {
    std::unique_lock lock(in_->mu);
    if (!in_->cv.wait_for(lock, timeout, [&] { return !in_->items.empty() || in_->closed; }))
      throw ProtocolError("receive timed out");
    if (in_->items.empty()) throw ProtocolError("channel closed by peer");
    Message m = std::move(in_->items.front());
    in_->items.pop_front();
    return m;
  }

  void close() override {
    for (auto* q : {in_.get(), out_.get()}) {
      {
        std::lock_guard lock(q->mu);
        q->closed = true;
      }
      q->cv.notify_all();
    }
  }

 private:
  std::shared_ptr<Queue> in_;
  std::shared_ptr<Queue> out_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_channel_pair() {
  auto a = std::make_shared<Queue>();
  auto b = std::make_shared<Queue>();
  return {std::make_unique<ChannelEndpoint>(a, b), std::make_unique<ChannelEndpoint>(b, a)};
}

void RecordingTransport::send(const Message& msg) {
  log_.push_back({TranscriptEntry::Direction::kToClient, client_, msg});
  inner_.send(msg);
}

Message RecordingTransport::receive(std::chrono::milliseconds timeout) {
  Message m = inner_.receive(timeout);
  log_.push_back({TranscriptEntry::Direction::kToMaster, client_, m});
  return m;
}

}  // namespace fet::protocol
