#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zonewatch/engine.hpp"
#include "zonewatch/zones.hpp"

namespace zonewatch {

struct SessionConfig {
  double source_w = 640.0;
  double source_h = 480.0;
  // Canvas size until a client sends set_config; 0 means "same as source".
  double display_w = 0.0;
  double display_h = 0.0;
  EngineOptions engine;
  DrawingOptions drawing;
  // Zones present before any client connects; its display size becomes the canvas size.
  std::optional<ZoneFile> initial_zones;
  // Encoded frame images larger than this are dropped.
  std::size_t max_frame_bytes = 8 * 1024 * 1024;
};

struct Outbound {
  enum class Target { Sender, All };
  Target target = Target::All;
  std::string payload;
};

// Result of pushing one detection frame through the session.
struct FrameOutput {
  // Messages for every client, in order: optional "frame" image, then "report".
  std::vector<std::string> broadcasts;
  // Report record in the offline JSONL format (no "type" field), empty if the frame was dropped.
  std::string report_line;
};

/// State of one operator session, independent of any transport.
///
/// Owns the drawing session, the coordinate mapping and the occupancy
/// pipeline. Every method must be called from one thread (the server's
/// session strand); the returned messages are what the transport delivers.
class SessionCore {
 public:
  explicit SessionCore(SessionConfig config = {});

  // Parses and applies one client message. Never throws: protocol errors
  // become an {"type":"error"} reply to the sender.
  std::vector<Outbound> handle_client_message(std::string_view text);

  // Evaluates a frame against the current zones. Frames that do not advance
  // the frame index are dropped.
  FrameOutput on_frame(const DetectionFrame& frame);

  // {"type":"frame","frame":N,"image_b64":...} or nothing if the payload is
  // empty or larger than max_frame_bytes (counted in dropped_images()).
  std::optional<std::string> forward_frame(std::string_view image_b64, std::int64_t frame_index);

  // Sent to a client as soon as it connects: zones snapshot, then the latest report if any.
  std::vector<std::string> join_messages() const;

  std::string zones_message() const;

  const DrawingSession& drawing() const noexcept { return drawing_; }
  const CoordinateMapping& mapping() const noexcept { return mapping_; }
  const EngineOptions& engine_options() const noexcept { return pipeline_.options(); }
  const std::optional<OccupancyReport>& last_report() const noexcept { return pipeline_.last_report(); }
  std::size_t dropped_images() const noexcept { return dropped_images_; }
  std::size_t dropped_frames() const noexcept { return dropped_frames_; }
  std::size_t evaluator_errors() const noexcept { return evaluator_errors_; }

 private:
  std::vector<Outbound> dispatch(const std::string& type, const nlohmann::json& msg);
  std::string report_message(const OccupancyReport& report, const std::vector<Point>& keypoints) const;

  SessionConfig config_;
  DrawingSession drawing_;
  CoordinateMapping mapping_;
  OccupancyPipeline pipeline_;
  std::optional<std::int64_t> last_frame_;
  std::string last_report_message_;
  std::size_t dropped_images_ = 0;
  std::size_t dropped_frames_ = 0;
  std::size_t evaluator_errors_ = 0;
};

std::string error_message(std::string_view detail);

}  // namespace zonewatch
