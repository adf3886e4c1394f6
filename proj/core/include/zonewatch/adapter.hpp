#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "zonewatch/engine.hpp"

namespace zonewatch {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

// "HOST:PORT". Throws ConfigError.
Endpoint parse_endpoint(const std::string& text);

struct AdapterStats {
  std::size_t frames = 0;
  std::size_t malformed = 0;
  std::size_t out_of_order = 0;
  std::size_t connections = 0;
};

/// TCP listener for live detectors. Each connection sends newline-delimited
/// frame records (the trace frame format, optionally carrying its own
/// "source" size). Malformed lines and frames whose index does not increase
/// are skipped and counted. A dropped connection ends that stream cleanly and
/// the listener keeps accepting.
class DetectionAdapter {
 public:
  using FrameHandler = std::function<void(DetectionFrame)>;

  // Binds immediately; port 0 picks an ephemeral port. Throws IoError.
  DetectionAdapter(const Endpoint& endpoint, double source_w, double source_h);
  ~DetectionAdapter();

  DetectionAdapter(const DetectionAdapter&) = delete;
  DetectionAdapter& operator=(const DetectionAdapter&) = delete;

  std::uint16_t port() const noexcept;

  // Blocks until stop(). Frames are delivered one at a time, in arrival order,
  // on the calling thread.
  void run(FrameHandler on_frame);
  // Safe to call from any thread.
  void stop();

  AdapterStats stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace zonewatch
