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

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <thread>

#include "fet/error.hpp"
#include "fet/protocol/transport.hpp"

namespace fet::protocol {
namespace {

using Clock = std::chrono::steady_clock;

std::pair<std::string, std::string> split_address(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos) throw ConfigError("address '" + address + "' is not host:port");
  std::string host = address.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  return {host, address.substr(colon + 1)};
}

std::string errno_text() { return std::strerror(errno); }

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left < 0 ? 0 : static_cast<int>(left);
}

class TcpTransport : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpTransport() override { close(); }

  void send(const Message& msg) override {
    if (fd_ < 0) throw ProtocolError("send on closed connection");
    std::string frame = frame_encode(msg);
    std::size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("send failed: " + errno_text());
      }
      off += static_cast<std::size_t>(n);
    }
  }

  Message receive(std::chrono::milliseconds timeout) override {
    if (fd_ < 0) throw ProtocolError("receive on closed connection");
    auto deadline = Clock::now() + timeout;
    std::array<unsigned char, 4> header{};
    read_exact(reinterpret_cast<char*>(header.data()), header.size(), deadline);
    std::size_t len = frame_length(header);
    std::string frame(4 + len, '\0');
    std::memcpy(frame.data(), header.data(), 4);
    read_exact(frame.data() + 4, len, deadline);
    return frame_decode(frame);
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  void read_exact(char* dst, std::size_t len, Clock::time_point deadline) {
    std::size_t got = 0;
    while (got < len) {
      pollfd p{fd_, POLLIN, 0};
      int rc = ::poll(&p, 1, remaining_ms(deadline));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("poll failed: " + errno_text());
      }
      if (rc == 0) throw ProtocolError("receive timed out");
      ssize_t n = ::recv(fd_, dst + got, len - got, 0);
      if (n == 0) throw ProtocolError(got == 0 ? "connection closed by peer" : "connection closed mid-frame");
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ProtocolError("recv failed: " + errno_text());
      }
      got += static_cast<std::size_t>(n);
    }
  }

  int fd_;
};

}  // namespace

TcpListener::TcpListener(const std::string& address) {
  auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw ConfigError("cannot resolve '" + address + "': " + ::gai_strerror(rc));
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    throw IoError("socket: " + errno_text());
  }
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 16) != 0) {
    std::string err = errno_text();
    ::freeaddrinfo(res);
    ::close(fd_);
    throw IoError("cannot listen on " + address + ": " + err);
  }
  ::freeaddrinfo(res);
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept(std::chrono::milliseconds timeout) {
  auto deadline = Clock::now() + timeout;
  while (true) {
    pollfd p{fd_, POLLIN, 0};
    int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw ProtocolError("poll failed: " + errno_text());
    if (rc == 0) throw ProtocolError("timed out waiting for clients to connect");
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      throw ProtocolError("accept failed: " + errno_text());
    }
    return std::make_unique<TcpTransport>(fd);
  }
}

std::unique_ptr<Transport> tcp_connect(const std::string& address, std::chrono::milliseconds timeout) {
  auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw ConfigError("cannot resolve '" + address + "': " + ::gai_strerror(rc));
  auto deadline = Clock::now() + timeout;
  std::string last_error;
  // The master may still be starting; retry refused connections until the deadline.
  do {
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) break;
    if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpTransport>(fd);
    }
    last_error = errno_text();
    ::close(fd);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  } while (Clock::now() < deadline);
  ::freeaddrinfo(res);
  throw ProtocolError("cannot connect to " + address + ": " + last_error);
}

}  // namespace fet::protocol
