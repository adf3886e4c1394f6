#include "zonewatch/adapter.hpp"

#include <atomic>
#include <charconv>
#include <mutex>

#include <boost/asio.hpp>

#include "zonewatch/error.hpp"
#include "zonewatch/trace.hpp"

namespace zonewatch {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {
constexpr std::size_t kMaxLineBytes = 16 * 1024 * 1024;
}

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError("endpoint must be HOST:PORT, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  const std::string port = text.substr(colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535) {
    throw ConfigError("invalid port in endpoint '" + text + "'");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

struct DetectionAdapter::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  double source_w;
  double source_h;
  FrameHandler handler;
  std::optional<std::int64_t> last_index;

  mutable std::mutex stats_mutex;
  AdapterStats stats;

  Impl(double w, double h) : source_w(w), source_h(h) {}

  struct Connection : std::enable_shared_from_this<Connection> {
    Impl& owner;
    tcp::socket socket;
    asio::streambuf buffer{kMaxLineBytes};

    Connection(Impl& o, tcp::socket s) : owner(o), socket(std::move(s)) {}

    void read_next() {
      asio::async_read_until(socket, buffer, '\n',
                             [self = shared_from_this()](boost::system::error_code ec, std::size_t n) {
                               self->on_line(ec, n);
                             });
    }

    void on_line(boost::system::error_code ec, std::size_t n) {
      if (ec == asio::error::not_found) {
        // Line longer than the buffer limit; nothing sensible to recover.
        owner.count_malformed();
        return;
      }
      if (ec) {
        // EOF or reset: flush a trailing unterminated line, then end.
        if (buffer.size() > 0) {
          std::string rest(asio::buffers_begin(buffer.data()), asio::buffers_end(buffer.data()));
          buffer.consume(buffer.size());
          owner.deliver(rest);
        }
        return;
      }
      std::string line(asio::buffers_begin(buffer.data()), asio::buffers_begin(buffer.data()) + n);
      buffer.consume(n);
      owner.deliver(line);
      read_next();
    }
  };

  void count_malformed() {
    std::lock_guard lock(stats_mutex);
    ++stats.malformed;
  }

  void deliver(std::string line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    DetectionFrame frame;
    try {
      frame = parse_frame_line(line, source_w, source_h);
    } catch (const Error&) {
      count_malformed();
      return;
    }
    if (last_index && frame.frame_index <= *last_index) {
      std::lock_guard lock(stats_mutex);
      ++stats.out_of_order;
      return;
    }
    last_index = frame.frame_index;
    {
      std::lock_guard lock(stats_mutex);
      ++stats.frames;
    }
    if (handler) handler(std::move(frame));
  }

  void accept_next() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec == asio::error::operation_aborted) return;
      } else {
        {
          std::lock_guard lock(stats_mutex);
          ++stats.connections;
        }
        std::make_shared<Connection>(*this, std::move(socket))->read_next();
      }
      accept_next();
    });
  }
};

DetectionAdapter::DetectionAdapter(const Endpoint& endpoint, double source_w, double source_h)
    : impl_(std::make_unique<Impl>(source_w, source_h)) {
  if (!(source_w > 0.0) || !(source_h > 0.0)) throw ConfigError("adapter source size must be positive");
  boost::system::error_code ec;
  tcp::resolver resolver(impl_->io);
  const auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port), ec);
  if (ec || results.empty()) throw IoError("cannot resolve '" + endpoint.host + "': " + ec.message());
  const tcp::endpoint bind_to = results.begin()->endpoint();

  impl_->acceptor.open(bind_to.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(tcp::acceptor::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(bind_to, ec);
  if (!ec) impl_->acceptor.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) {
    throw IoError("cannot listen on " + endpoint.host + ":" + std::to_string(endpoint.port) + ": " + ec.message());
  }
}

DetectionAdapter::~DetectionAdapter() { stop(); }

std::uint16_t DetectionAdapter::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

void DetectionAdapter::run(FrameHandler on_frame) {
  impl_->handler = std::move(on_frame);
  impl_->accept_next();
  impl_->io.run();
}

void DetectionAdapter::stop() { impl_->io.stop(); }

AdapterStats DetectionAdapter::stats() const {
  std::lock_guard lock(impl_->stats_mutex);
  return impl_->stats;
}

}  // namespace zonewatch
