#include "ws_client.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace vtest {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct WsClient::Impl {
  net::io_context ioc;
  websocket::stream<beast::tcp_stream> ws{ioc};
  beast::flat_buffer buffer;
  bool reading = false;
  std::deque<vagent::WireFrame> inbox;
  bool eof = false;

  void start_read() {
    if (reading || eof) return;
    reading = true;
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      reading = false;
      if (ec) {
        eof = true;
        return;
      }
      inbox.push_back({ws.got_text() ? vagent::WireFrame::Kind::Text : vagent::WireFrame::Kind::Binary,
                       beast::buffers_to_string(buffer.data())});
      buffer.consume(buffer.size());
      start_read();
    });
  }

  void run_until(const std::function<bool()>& done, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (!done()) {
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return;
      ioc.restart();
      ioc.run_one_for(deadline - now);
    }
  }
};

WsClient::WsClient() : impl_(std::make_unique<Impl>()) {}

WsClient::~WsClient() {
  if (!closed_) drop();
}

void WsClient::connect(std::uint16_t port, std::chrono::milliseconds timeout) {
  auto& ws = impl_->ws;
  beast::get_lowest_layer(ws).expires_after(timeout);
  beast::get_lowest_layer(ws).connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
  beast::get_lowest_layer(ws).socket().set_option(tcp::no_delay(true));
  ws.handshake("127.0.0.1:" + std::to_string(port), "/");
  beast::get_lowest_layer(ws).expires_never();
  impl_->start_read();
}

void WsClient::send(const vagent::ClientMessage& message) { send_raw(vagent::encode_message(message)); }

void WsClient::send_raw(const vagent::WireFrame& frame) {
  auto& ws = impl_->ws;
  ws.text(frame.kind == vagent::WireFrame::Kind::Text);
  bool done = false;
  beast::error_code result;
  ws.async_write(net::buffer(frame.payload), [&](beast::error_code ec, std::size_t) {
    result = ec;
    done = true;
  });
  impl_->run_until([&] { return done; }, std::chrono::seconds(5));
  if (!done || result) throw std::runtime_error("websocket write failed: " + result.message());
}

std::optional<vagent::ServerMessage> WsClient::receive(std::chrono::milliseconds timeout) {
  impl_->run_until([&] { return !impl_->inbox.empty() || impl_->eof; }, timeout);
  if (impl_->inbox.empty()) return std::nullopt;
  vagent::WireFrame frame = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  return vagent::decode_server_message(frame);
}

std::vector<vagent::ServerMessage> WsClient::receive_until(
    const std::function<bool(const vagent::ServerMessage&)>& stop, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::vector<vagent::ServerMessage> out;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    auto m = receive(left);
    if (!m) break;
    out.push_back(std::move(*m));
    if (stop(out.back())) break;
  }
  return out;
}

void WsClient::drop() {
  closed_ = true;
  beast::error_code ec;
  beast::get_lowest_layer(impl_->ws).socket().shutdown(tcp::socket::shutdown_both, ec);
  beast::get_lowest_layer(impl_->ws).socket().close(ec);
}

void WsClient::close() {
  if (closed_) return;
  closed_ = true;
  bool done = false;
  impl_->ws.async_close(websocket::close_code::normal, [&](beast::error_code) { done = true; });
  impl_->run_until([&] { return done; }, std::chrono::seconds(2));
}

}  // namespace vtest
