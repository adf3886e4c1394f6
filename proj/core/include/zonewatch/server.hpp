#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "zonewatch/session.hpp"

namespace zonewatch {

struct ServerOptions {
  std::string address = "0.0.0.0";
  std::uint16_t port = 8800;  // 0 picks an ephemeral port
  // Served over plain HTTP GET when set (index.html for "/").
  std::filesystem::path static_dir;
  // Per-client outbound queue bound; messages beyond it are dropped for that client.
  std::size_t client_queue_limit = 256;
};

struct ServerStats {
  std::size_t clients = 0;
  std::size_t frames = 0;
  std::size_t dropped_messages = 0;
};

/// WebSocket + HTTP front end for one SessionCore.
///
/// A single I/O thread owns the session: client commands and detection frames
/// are applied in arrival order on that thread. Every client has its own
/// bounded write queue, so a slow reader loses messages instead of delaying
/// evaluation. New clients first receive the zones snapshot and the latest
/// report.
class Server {
 public:
  using ReportSink = std::function<void(const std::string& report_line)>;

  // Binds immediately. Throws IoError if the address or port is unavailable.
  Server(SessionConfig session, ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept;

  // Receives every evaluated report line, on the I/O thread, in frame order.
  // Set before start().
  void set_report_sink(ReportSink sink);

  void start();
  // Closes all connections and joins the I/O thread. Idempotent.
  void stop();

  // Thread-safe. Queues the frame for evaluation.
  void submit_frame(DetectionFrame frame);
  // Thread-safe. Blocks until everything queued before the call has been applied.
  void drain();
  // Thread-safe. Runs `fn` on the I/O thread with the session and waits for it.
  void inspect(const std::function<void(const SessionCore&)>& fn);

  ServerStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace zonewatch
