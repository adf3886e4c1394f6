#pragma once

// Minimal synchronous WebSocket client for exercising the session server.

#include <chrono>
#include <optional>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

namespace zonewatch::testing {

class WsClient {
 public:
  explicit WsClient(std::uint16_t port) : ws_(ioc_) {
    namespace asio = boost::asio;
    asio::ip::tcp::resolver resolver(ioc_);
    const auto results = resolver.resolve("127.0.0.1", std::to_string(port));
    asio::connect(boost::beast::get_lowest_layer(ws_), results);
    ws_.handshake("127.0.0.1:" + std::to_string(port), "/");
    ws_.text(true);
  }

  ~WsClient() {
    boost::beast::error_code ec;
    ws_.close(boost::beast::websocket::close_code::normal, ec);
  }

  void send(const std::string& text) { ws_.write(boost::asio::buffer(text)); }
  void send(const nlohmann::json& msg) { send(msg.dump()); }

  std::string read() {
    boost::beast::flat_buffer buffer;
    ws_.read(buffer);
    return boost::beast::buffers_to_string(buffer.data());
  }

  nlohmann::json read_json() { return nlohmann::json::parse(read()); }

  // Reads until a message of `type` arrives.
  nlohmann::json read_until(const std::string& type) {
    for (;;) {
      auto msg = read_json();
      if (msg.value("type", "") == type) return msg;
    }
  }

 private:
  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};

}  // namespace zonewatch::testing
