#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zonewatch/geometry.hpp"
#include "zonewatch/zones.hpp"

namespace zonewatch {

using TrackId = std::int64_t;

struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  friend bool operator==(const Box&, const Box&) = default;
};

struct Detection {
  std::string class_name;
  Box bbox;  // source pixels, x1 <= x2 and y1 <= y2
  double score = 1.0;
  std::optional<TrackId> track_id;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectionFrame {
  std::int64_t frame_index = 0;
  std::int64_t t_ms = 0;
  double source_w = 0.0;
  double source_h = 0.0;
  std::vector<Detection> detections;
  // Optional encoded image for display; never decoded by the engine.
  std::optional<std::string> image_b64;

  friend bool operator==(const DetectionFrame&, const DetectionFrame&) = default;
};

enum class KeypointMode { Center, BottomCenter };

const char* to_string(KeypointMode mode) noexcept;
// Accepts "center" and "bottom" (or "bottom_center"). Throws ConfigError otherwise.
KeypointMode parse_keypoint_mode(const std::string& text);

struct EngineOptions {
  KeypointMode keypoint = KeypointMode::Center;
  Prefilter prefilter = Prefilter::On;
  // Empty accepts every class.
  std::vector<std::string> class_allowlist{"person"};
  double min_score = 0.25;

  bool accepts(const Detection& d) const;
};

struct ZoneCount {
  ZoneId zone_id = 0;
  std::size_t count = 0;
  ZoneState state = ZoneState::Vacant;
  // Sorted, de-duplicated track ids of tracked detections inside the zone.
  // Feeds diff_events; not part of the serialized record.
  std::vector<TrackId> members;

  friend bool operator==(const ZoneCount&, const ZoneCount&) = default;
};

enum class EventKind { Enter, Leave };

struct ZoneEvent {
  ZoneId zone_id = 0;
  TrackId track_id = 0;
  EventKind kind = EventKind::Enter;

  friend bool operator==(const ZoneEvent&, const ZoneEvent&) = default;
};

struct OccupancyReport {
  std::int64_t frame_index = 0;
  // Revision of the zone set the report was evaluated against.
  std::uint64_t zone_revision = 0;
  std::vector<ZoneCount> zones;  // ascending zone id
  std::vector<ZoneEvent> events;

  const ZoneCount* find(ZoneId id) const noexcept;
  friend bool operator==(const OccupancyReport&, const OccupancyReport&) = default;
};

struct StateTransition {
  ZoneId zone_id = 0;
  ZoneState from = ZoneState::Vacant;
  ZoneState to = ZoneState::Vacant;

  friend bool operator==(const StateTransition&, const StateTransition&) = default;
};

Point keypoint_of(const Detection& d, KeypointMode mode) noexcept;

// Counts keypoints per zone. Events are left empty; see diff_events.
// Throws MappingMismatch if the frame's source size differs from the mapping's.
OccupancyReport evaluate_frame(const ZoneSet& zones, const DetectionFrame& frame, const CoordinateMapping& mapping,
                               const EngineOptions& options);

// Applies report states to the zones and returns one record per flipped zone.
// Throws StaleSnapshot if the report was built from another zone revision.
std::vector<StateTransition> update_zone_states(ZoneSet& zones, const OccupancyReport& report);

// Enter for (zone, track) pairs present in `cur` but not `prev`, Leave for the reverse.
std::vector<ZoneEvent> diff_events(const OccupancyReport& prev, const OccupancyReport& cur);

// {"frame":N,"zones":[{"id":..,"count":..,"state":..}],"events":[{"zone":..,"track":..,"kind":..}]}
nlohmann::ordered_json report_to_json(const OccupancyReport& report);

/// Stream evaluator: one per detection stream, frames fed in order.
///
/// Each step evaluates the frame against the current zones, derives enter /
/// leave events against the previous step, and writes the new occupancy
/// states back into the zone set.
class OccupancyPipeline {
 public:
  struct Step {
    OccupancyReport report;
    std::vector<StateTransition> transitions;
  };

  explicit OccupancyPipeline(EngineOptions options = {}) : options_(std::move(options)) {}

  Step step(ZoneSet& zones, const DetectionFrame& frame, const CoordinateMapping& mapping);

  const EngineOptions& options() const noexcept { return options_; }
  void set_options(EngineOptions options) { options_ = std::move(options); }
  const std::optional<OccupancyReport>& last_report() const noexcept { return last_; }

 private:
  EngineOptions options_;
  std::optional<OccupancyReport> last_;
};

}  // namespace zonewatch
