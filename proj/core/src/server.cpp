#include "zonewatch/server.hpp"

#include <atomic>
#include <deque>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "zonewatch/error.hpp"

namespace zonewatch {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

std::string mime_type(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

}  // namespace

struct Server::Impl {
  struct WsClient;

  asio::io_context ioc;
  asio::executor_work_guard<asio::io_context::executor_type> work{ioc.get_executor()};
  tcp::acceptor acceptor{ioc};
  std::thread thread;
  std::atomic<bool> running{false};

  SessionCore core;
  ServerOptions options;
  ReportSink sink;
  std::set<std::shared_ptr<WsClient>> clients;

  std::atomic<std::size_t> client_count{0};
  std::atomic<std::size_t> frames{0};
  std::atomic<std::size_t> dropped{0};

  Impl(SessionConfig session, ServerOptions opts) : core(std::move(session)), options(std::move(opts)) {}

  struct WsClient : std::enable_shared_from_this<WsClient> {
    Impl& owner;
    websocket::stream<beast::tcp_stream> ws;
    beast::flat_buffer buffer;
    std::deque<std::shared_ptr<const std::string>> queue;
    bool writing = false;
    bool closed = false;

    WsClient(Impl& o, tcp::socket socket) : owner(o), ws(std::move(socket)) {}

    void accept(http::request<http::string_body> req) {
      ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
        if (ec) return;
        self->owner.clients.insert(self);
        self->owner.client_count = self->owner.clients.size();
        for (std::string& msg : self->owner.core.join_messages()) {
          self->send(std::make_shared<const std::string>(std::move(msg)));
        }
        self->read_next();
      });
    }

    void read_next() {
      ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) {
          self->drop();
          return;
        }
        const std::string text = beast::buffers_to_string(self->buffer.data());
        self->buffer.consume(self->buffer.size());
        for (Outbound& out : self->owner.core.handle_client_message(text)) {
          auto payload = std::make_shared<const std::string>(std::move(out.payload));
          if (out.target == Outbound::Target::Sender) {
            self->send(payload);
          } else {
            self->owner.broadcast(payload);
          }
        }
        self->read_next();
      });
    }

    void send(std::shared_ptr<const std::string> msg) {
      if (closed) return;
      if (queue.size() >= owner.options.client_queue_limit) {
        ++owner.dropped;
        return;
      }
      queue.push_back(std::move(msg));
      if (!writing) write_next();
    }

    void write_next() {
      if (queue.empty() || closed) {
        writing = false;
        return;
      }
      writing = true;
      ws.text(true);
      ws.async_write(asio::buffer(*queue.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) {
          self->drop();
          return;
        }
        self->queue.pop_front();
        self->write_next();
      });
    }

    void drop() {
      if (closed) return;
      closed = true;
      queue.clear();
      owner.clients.erase(shared_from_this());
      owner.client_count = owner.clients.size();
      beast::error_code ignored;
      beast::get_lowest_layer(ws).socket().close(ignored);
    }
  };

  struct HttpSession : std::enable_shared_from_this<HttpSession> {
    Impl& owner;
    beast::tcp_stream stream;
    beast::flat_buffer buffer;
    http::request<http::string_body> req;

    HttpSession(Impl& o, tcp::socket socket) : owner(o), stream(std::move(socket)) {}

    void read() {
      req = {};
      stream.expires_after(std::chrono::seconds(30));
      http::async_read(stream, buffer, req, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return;
        self->on_request();
      });
    }

    void on_request() {
      if (websocket::is_upgrade(req)) {
        stream.expires_never();
        std::make_shared<WsClient>(owner, stream.release_socket())->accept(std::move(req));
        return;
      }
      auto res = std::make_shared<http::response<http::string_body>>(respond());
      res->keep_alive(req.keep_alive());
      res->prepare_payload();
      http::async_write(stream, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
        if (ec || !res->keep_alive()) {
          beast::error_code ignored;
          self->stream.socket().shutdown(tcp::socket::shutdown_send, ignored);
          return;
        }
        self->read();
      });
    }

    http::response<http::string_body> respond() const {
      auto reply = [&](http::status status, std::string type, std::string body) {
        http::response<http::string_body> res{status, req.version()};
        res.set(http::field::server, "zonewatch");
        res.set(http::field::content_type, type);
        res.body() = std::move(body);
        return res;
      };
      if (req.method() != http::verb::get && req.method() != http::verb::head) {
        return reply(http::status::method_not_allowed, "text/plain", "method not allowed\n");
      }
      std::string target(req.target());
      if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
      if (target.empty() || target[0] != '/' || target.find("..") != std::string::npos) {
        return reply(http::status::bad_request, "text/plain", "bad path\n");
      }
      if (owner.options.static_dir.empty()) {
        if (target == "/") return reply(http::status::ok, "text/plain", "zonewatch session server\n");
        return reply(http::status::not_found, "text/plain", "not found\n");
      }
      if (target == "/") target = "/index.html";
      const std::filesystem::path file = owner.options.static_dir / target.substr(1);
      std::ifstream in(file, std::ios::binary);
      if (!in) return reply(http::status::not_found, "text/plain", "not found\n");
      std::ostringstream body;
      body << in.rdbuf();
      return reply(http::status::ok, mime_type(file), body.str());
    }
  };

  void accept_next() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec == asio::error::operation_aborted) return;
      if (!ec) std::make_shared<HttpSession>(*this, std::move(socket))->read();
      accept_next();
    });
  }

  void broadcast(const std::shared_ptr<const std::string>& msg) {
    // send() may drop a client and mutate the set.
    const std::vector<std::shared_ptr<WsClient>> targets(clients.begin(), clients.end());
    for (const auto& c : targets) c->send(msg);
  }

  void evaluate(const DetectionFrame& frame) {
    FrameOutput out = core.on_frame(frame);
    ++frames;
    for (std::string& b : out.broadcasts) broadcast(std::make_shared<const std::string>(std::move(b)));
    if (sink && !out.report_line.empty()) sink(out.report_line);
  }

  void run_and_wait(std::function<void()> fn) {
    if (!running) {
      fn();
      return;
    }
    std::promise<void> done;
    auto fut = done.get_future();
    asio::post(ioc, [&] {
      fn();
      done.set_value();
    });
    fut.wait();
  }
};

Server::Server(SessionConfig session, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(options))) {
  beast::error_code ec;
  const auto address = asio::ip::make_address(impl_->options.address, ec);
  if (ec) throw IoError("invalid listen address '" + impl_->options.address + "'");
  const tcp::endpoint ep(address, impl_->options.port);
  impl_->acceptor.open(ep.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(ep, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw IoError("cannot listen on " + impl_->options.address + ":" + std::to_string(impl_->options.port) + ": " +
                  ec.message());
  }
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const noexcept {
  beast::error_code ec;
  return impl_->acceptor.local_endpoint(ec).port();
}

void Server::set_report_sink(ReportSink sink) { impl_->sink = std::move(sink); }

void Server::start() {
  if (impl_->running || impl_->thread.joinable()) return;
  impl_->running = true;
  impl_->accept_next();
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
    const std::vector<std::shared_ptr<Impl::WsClient>> targets(impl->clients.begin(), impl->clients.end());
    for (const auto& c : targets) c->drop();
    impl->work.reset();
    impl->ioc.stop();
  });
  impl_->thread.join();
  impl_->running = false;
}

void Server::submit_frame(DetectionFrame frame) {
  if (!impl_->running) {
    impl_->evaluate(frame);
    return;
  }
  asio::post(impl_->ioc, [impl = impl_.get(), f = std::move(frame)] { impl->evaluate(f); });
}

void Server::drain() {
  impl_->run_and_wait([] {});
}

void Server::inspect(const std::function<void(const SessionCore&)>& fn) {
  impl_->run_and_wait([&] { fn(impl_->core); });
}

ServerStats Server::stats() const { return {impl_->client_count.load(), impl_->frames.load(), impl_->dropped.load()}; }

}  // namespace zonewatch
