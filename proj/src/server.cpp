#include "vagent/server.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <random>
#include <thread>
#include <variant>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

namespace vagent {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxMessageBytes = 16 * 1024 * 1024;

class WorkerCount {
 public:
  void add() {
    std::lock_guard lock(mutex_);
    ++count_;
  }
  void done() {
    {
      std::lock_guard lock(mutex_);
      --count_;
    }
    cv_.notify_all();
  }
  void wait_zero() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return count_ == 0; });
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t count_ = 0;
};

struct TransportLost {};
struct Shutdown {};
using Command = std::variant<ClientMessage, TransportLost, Shutdown>;

bool starts_turn(const ClientMessage& m) {
  return std::holds_alternative<msg::UtteranceText>(m) || std::holds_alternative<msg::UtteranceEnd>(m);
}

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, std::shared_ptr<const Engine> engine, std::shared_ptr<const Clock> clock,
             std::string session_id, std::uint64_t seed, Millis tick,
             std::shared_ptr<WorkerCount> workers)
      : ws_(std::move(socket)),
        engine_(std::move(engine)),
        clock_(std::move(clock)),
        session_id_(std::move(session_id)),
        seed_(seed),
        tick_(tick),
        workers_(std::move(workers)) {}

  void run() {
    net::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->on_run(); });
  }

  void request_shutdown() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->shutdown_requested_ = true;
      if (self->worker_started_) {
        self->enqueue(Shutdown{});
      } else {
        beast::error_code ec;
        beast::get_lowest_layer(self->ws_).socket().close(ec);
      }
    });
  }

 private:
  void on_run() {
    beast::get_lowest_layer(ws_).expires_never();
    websocket::stream_base::timeout timeout = websocket::stream_base::timeout::suggested(beast::role_type::server);
    timeout.idle_timeout = std::chrono::seconds(60);
    timeout.keep_alive_pings = true;
    ws_.set_option(timeout);
    ws_.read_message_max(kMaxMessageBytes);
    ws_.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
      res.set(beast::http::field::server, "vagent");
    }));
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  void on_accept(beast::error_code ec) {
    if (ec) {
      spdlog::debug("handshake failed: {}", ec.message());
      return;
    }
    if (shutdown_requested_) {
      beast::error_code ignored;
      beast::get_lowest_layer(ws_).socket().close(ignored);
      return;
    }
    worker_started_ = true;
    workers_->add();
    std::thread([self = shared_from_this(), workers = workers_]() mutable {
      self->work();
      self.reset();
      workers->done();
    }).detach();
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      enqueue(TransportLost{});
      return;
    }
    WireFrame frame{ws_.got_text() ? WireFrame::Kind::Text : WireFrame::Kind::Binary,
                    beast::buffers_to_string(buffer_.data())};
    buffer_.consume(buffer_.size());
    try {
      ClientMessage message = decode_client_message(frame);
      bool expected = false;
      if (starts_turn(message) && !turn_busy_.compare_exchange_strong(expected, true)) {
        push_frame(encode_message(ServerMessage{
            to_message(Error(ErrorCode::TurnInFlight, "a turn is already in flight for this session"))}));
      } else {
        enqueue(std::move(message));
      }
    } catch (const Error& e) {
      push_frame(encode_message(ServerMessage{to_message(e)}));
    }
    do_read();
  }

  void enqueue(Command command) {
    {
      std::lock_guard lock(mutex_);
      if (!accepting_) return;
      commands_.push_back(std::move(command));
    }
    cv_.notify_one();
  }

  // Runs on the worker thread.
  void work() {
    ConnectionHandler handler(engine_, clock_, session_id_, seed_,
                              [this](ServerMessage m) {
                                // The client may start its next turn as soon as it sees the
                                // message ending this one, so accept it from here on.
                                if (ends_turn(m)) turn_busy_ = false;
                                send(std::move(m));
                              });
    std::unique_lock lock(mutex_);
    for (;;) {
      cv_.wait_for(lock, tick_, [&] { return !commands_.empty(); });
      while (!commands_.empty()) {
        Command command = std::move(commands_.front());
        commands_.pop_front();
        lock.unlock();
        const bool stop = process(handler, command);
        lock.lock();
        if (stop) {
          accepting_ = false;
          commands_.clear();
          return;
        }
      }
      lock.unlock();
      try {
        handler.tick();
      } catch (const std::exception& e) {
        spdlog::error("session {}: tick failed: {}", session_id_, e.what());
      }
      lock.lock();
    }
  }

  static bool ends_turn(const ServerMessage& m) {
    return std::holds_alternative<msg::AgentReplyEnd>(m) || std::holds_alternative<msg::Error>(m) ||
           std::holds_alternative<msg::SessionClosed>(m);
  }

  bool process(ConnectionHandler& handler, const Command& command) {
    try {
      if (const auto* message = std::get_if<ClientMessage>(&command)) {
        handler.handle(*message);
        if (starts_turn(*message)) turn_busy_ = false;
        return false;
      }
      if (std::holds_alternative<TransportLost>(command)) {
        spdlog::debug("session {}: transport lost", session_id_);
        handler.transport_lost();
        return true;
      }
      handler.shutdown();
    } catch (const std::exception& e) {
      spdlog::error("session {}: {}", session_id_, e.what());
      turn_busy_ = false;
      return false;
    }
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->close_after_flush(); });
    return true;
  }

  void send(ServerMessage message) {
    net::post(ws_.get_executor(), [self = shared_from_this(), frame = encode_message(message)]() mutable {
      self->push_frame(std::move(frame));
    });
  }

  // The remaining members run on the strand.
  void push_frame(WireFrame frame) {
    if (closed_) return;
    outbox_.push_back(std::move(frame));
    if (!writing_) write_next();
  }

  void write_next() {
    if (outbox_.empty()) {
      writing_ = false;
      if (close_after_flush_) do_close();
      return;
    }
    writing_ = true;
    const WireFrame& frame = outbox_.front();
    ws_.text(frame.kind == WireFrame::Kind::Text);
    ws_.async_write(net::buffer(frame.payload),
                    beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      writing_ = false;
      closed_ = true;
      outbox_.clear();
      return;
    }
    outbox_.pop_front();
    write_next();
  }

  void close_after_flush() {
    close_after_flush_ = true;
    if (!writing_) do_close();
  }

  void do_close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::going_away,
                    [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<WireFrame> outbox_;
  bool writing_ = false;
  bool closed_ = false;
  bool close_after_flush_ = false;
  bool worker_started_ = false;
  bool shutdown_requested_ = false;
  std::atomic<bool> turn_busy_{false};

  std::shared_ptr<const Engine> engine_;
  std::shared_ptr<const Clock> clock_;
  std::string session_id_;
  std::uint64_t seed_;
  Millis tick_;
  std::shared_ptr<WorkerCount> workers_;

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Command> commands_;
  bool accepting_ = true;
};

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions opts)
      : options(std::move(opts)), acceptor(net::make_strand(ioc)), rng(std::random_device{}()) {
    if (!options.engine) throw Error(ErrorCode::InvalidArgument, "server needs an engine");
    if (!options.clock) options.clock = std::make_shared<SteadyClock>();
    beast::error_code ec;
    const auto address = net::ip::make_address(options.bind_address, ec);
    if (ec) throw Error(ErrorCode::BindError, "invalid bind address \"" + options.bind_address + "\"");
    const tcp::endpoint endpoint(address, options.port);
    const std::string where = options.bind_address + ":" + std::to_string(options.port);
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorCode::BindError, "cannot listen on " + where + ": " + ec.message());
    port = acceptor.local_endpoint().port();
  }

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec == net::error::operation_aborted || !acceptor.is_open()) return;
      if (ec) {
        spdlog::warn("accept failed: {}", ec.message());
      } else {
        open_connection(std::move(socket));
      }
      do_accept();
    });
  }

  void open_connection(tcp::socket socket) {
    // Replies are many small frames; don't let Nagle hold them back.
    beast::error_code ignored;
    socket.set_option(tcp::no_delay(true), ignored);
    std::shared_ptr<Connection> connection;
    {
      std::lock_guard lock(mutex);
      if (stopping) return;
      char id[17];
      std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(rng()));
      connection = std::make_shared<Connection>(std::move(socket), options.engine, options.clock, id, rng(),
                                                options.tick_interval, workers);
      std::erase_if(connections, [](const auto& w) { return w.expired(); });
      connections.push_back(connection);
    }
    connection->run();
  }

  std::vector<std::shared_ptr<Connection>> live() {
    std::lock_guard lock(mutex);
    std::vector<std::shared_ptr<Connection>> out;
    for (auto& w : connections) {
      if (auto c = w.lock()) out.push_back(std::move(c));
    }
    return out;
  }

  void shutdown() {
    {
      std::lock_guard lock(mutex);
      if (stopping) return;
      stopping = true;
    }
    net::post(acceptor.get_executor(), [this] {
      beast::error_code ec;
      acceptor.close(ec);
    });
    for (auto& connection : live()) connection->request_shutdown();
    // The request above is posted to each strand before the worker sees it,
    // so connections that were mid-handshake are covered as well.
    if (!threads.empty()) {
      const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
      while (std::chrono::steady_clock::now() < deadline) {
        workers->wait_zero();
        if (live().empty()) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
      workers->wait_zero();
    }
    ioc.stop();
    for (auto& t : threads) t.join();
    threads.clear();
    {
      std::lock_guard lock(mutex);
      done = true;
    }
    done_cv.notify_all();
    spdlog::info("server stopped");
  }

  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::uint16_t port = 0;
  std::vector<std::thread> threads;
  std::shared_ptr<WorkerCount> workers = std::make_shared<WorkerCount>();

  std::mutex mutex;
  std::condition_variable done_cv;
  std::vector<std::weak_ptr<Connection>> connections;
  std::mt19937_64 rng;
  bool started = false;
  bool stopping = false;
  bool done = false;
};

Server::Server(ServerOptions options) : impl_(std::make_shared<Impl>(std::move(options))) {}

Server::~Server() { shutdown(); }

std::uint16_t Server::port() const noexcept { return impl_->port; }

void Server::start() {
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->started || impl_->stopping) return;
    impl_->started = true;
  }
  impl_->do_accept();
  const unsigned n = std::max(1u, impl_->options.io_threads);
  for (unsigned i = 0; i < n; ++i) {
    impl_->threads.emplace_back([impl = impl_.get()] { impl->ioc.run(); });
  }
  spdlog::info("listening on {}:{}", impl_->options.bind_address, impl_->port);
}

void Server::shutdown() { impl_->shutdown(); }

void Server::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->done_cv.wait(lock, [&] { return impl_->done; });
}

std::size_t Server::open_connections() const { return impl_->live().size(); }

}  // namespace vagent
