#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "vagent/conversation.hpp"
#include "vagent/session.hpp"

namespace vagent {

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  Millis tick_interval{250};
  std::shared_ptr<const Engine> engine;
  std::shared_ptr<const Clock> clock;  // defaults to SteadyClock
  unsigned io_threads = 2;
};

// WebSocket gateway: one session per connection. Each connection gets a
// worker that owns its ConnectionHandler, drains a command queue and ticks
// the session timers; writes go through a per-connection strand.
class Server {
 public:
  // Binds and listens. Throws Error(BindError).
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept;
  void start();
  // Every open session receives SessionClosed(ServerShutdown), outgoing
  // frames are flushed, then the sockets close. Idempotent.
  void shutdown();
  // Blocks until shutdown has completed.
  void wait();
  std::size_t open_connections() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace vagent
