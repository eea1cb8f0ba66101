#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vagent/protocol.hpp"

namespace vtest {

// Blocking WebSocket test client with per-call timeouts.
class WsClient {
 public:
  WsClient();
  ~WsClient();
  WsClient(const WsClient&) = delete;
  WsClient& operator=(const WsClient&) = delete;

  void connect(std::uint16_t port, std::chrono::milliseconds timeout = std::chrono::seconds(5));
  void send(const vagent::ClientMessage& message);
  void send_raw(const vagent::WireFrame& frame);

  // Next message, or nullopt on timeout or once the connection has closed.
  std::optional<vagent::ServerMessage> receive(std::chrono::milliseconds timeout);
  // Messages up to and including the first one satisfying `stop`.
  std::vector<vagent::ServerMessage> receive_until(
      const std::function<bool(const vagent::ServerMessage&)>& stop, std::chrono::milliseconds timeout);
  template <class T>
  std::vector<vagent::ServerMessage> receive_until(std::chrono::milliseconds timeout) {
    return receive_until([](const vagent::ServerMessage& m) { return std::holds_alternative<T>(m); }, timeout);
  }

  // Drops the TCP connection without a closing handshake.
  void drop();
  void close();
  bool closed() const noexcept { return closed_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool closed_ = false;
};

}  // namespace vtest
