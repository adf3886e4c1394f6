#include "zonewatch/engine.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <tuple>
#include <utility>

#include "zonewatch/error.hpp"

namespace zonewatch {

const char* to_string(KeypointMode mode) noexcept {
  return mode == KeypointMode::BottomCenter ? "bottom" : "center";
}

KeypointMode parse_keypoint_mode(const std::string& text) {
  if (text == "center") return KeypointMode::Center;
  if (text == "bottom" || text == "bottom_center") return KeypointMode::BottomCenter;
  throw ConfigError("unknown keypoint mode '" + text + "' (expected center or bottom)");
}

bool EngineOptions::accepts(const Detection& d) const {
  if (d.score < min_score) return false;
  if (class_allowlist.empty()) return true;
  return std::find(class_allowlist.begin(), class_allowlist.end(), d.class_name) != class_allowlist.end();
}

const ZoneCount* OccupancyReport::find(ZoneId id) const noexcept {
  for (const ZoneCount& z : zones) {
    if (z.zone_id == id) return &z;
  }
  return nullptr;
}

Point keypoint_of(const Detection& d, KeypointMode mode) noexcept {
  const double cx = (d.bbox.x1 + d.bbox.x2) / 2.0;
  if (mode == KeypointMode::BottomCenter) return {cx, d.bbox.y2};
  return {cx, (d.bbox.y1 + d.bbox.y2) / 2.0};
}

OccupancyReport evaluate_frame(const ZoneSet& zones, const DetectionFrame& frame, const CoordinateMapping& mapping,
                               const EngineOptions& options) {
  if (frame.source_w != mapping.source_w() || frame.source_h != mapping.source_h()) {
    throw MappingMismatch("frame " + std::to_string(frame.frame_index) + " is " + std::to_string(frame.source_w) +
                          "x" + std::to_string(frame.source_h) + " but the mapping expects " +
                          std::to_string(mapping.source_w()) + "x" + std::to_string(mapping.source_h()));
  }

  struct Keypoint {
    Point display;
    std::optional<TrackId> track;
  };
  std::vector<Keypoint> keypoints;
  keypoints.reserve(frame.detections.size());
  for (const Detection& d : frame.detections) {
    if (!options.accepts(d)) continue;
    keypoints.push_back({mapping.to_display(keypoint_of(d, options.keypoint)), d.track_id});
  }

  OccupancyReport report;
  report.frame_index = frame.frame_index;
  report.zone_revision = zones.revision;
  report.zones.reserve(zones.zones.size());
  for (const Zone& zone : zones.zones) {
    ZoneCount entry;
    entry.zone_id = zone.id();
    for (const Keypoint& k : keypoints) {
      if (!point_in_zone(k.display, zone.chain(), zone.bounds(), options.prefilter)) continue;
      ++entry.count;
      if (k.track) entry.members.push_back(*k.track);
    }
    std::sort(entry.members.begin(), entry.members.end());
    entry.members.erase(std::unique(entry.members.begin(), entry.members.end()), entry.members.end());
    entry.state = entry.count > 0 ? ZoneState::Occupied : ZoneState::Vacant;
    report.zones.push_back(std::move(entry));
  }
  std::sort(report.zones.begin(), report.zones.end(),
            [](const ZoneCount& a, const ZoneCount& b) { return a.zone_id < b.zone_id; });
  return report;
}

std::vector<StateTransition> update_zone_states(ZoneSet& zones, const OccupancyReport& report) {
  if (report.zone_revision != zones.revision) {
    throw StaleSnapshot("report built from zone revision " + std::to_string(report.zone_revision) +
                        ", zone set is at revision " + std::to_string(zones.revision));
  }
  std::vector<StateTransition> transitions;
  for (Zone& zone : zones.zones) {
    const ZoneCount* entry = report.find(zone.id());
    if (entry == nullptr || entry->state == zone.state()) continue;
    transitions.push_back({zone.id(), zone.state(), entry->state});
    zone.set_state(entry->state);
  }
  return transitions;
}

std::vector<ZoneEvent> diff_events(const OccupancyReport& prev, const OccupancyReport& cur) {
  using Key = std::pair<ZoneId, TrackId>;
  auto pairs = [](const OccupancyReport& r) {
    std::set<Key> out;
    for (const ZoneCount& z : r.zones) {
      for (TrackId t : z.members) out.emplace(z.zone_id, t);
    }
    return out;
  };
  const std::set<Key> before = pairs(prev);
  const std::set<Key> after = pairs(cur);

  std::vector<Key> entered;
  std::vector<Key> left;
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(entered));
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(left));

  std::vector<ZoneEvent> events;
  events.reserve(entered.size() + left.size());
  for (const auto& [zone, track] : entered) events.push_back({zone, track, EventKind::Enter});
  for (const auto& [zone, track] : left) events.push_back({zone, track, EventKind::Leave});
  std::sort(events.begin(), events.end(), [](const ZoneEvent& a, const ZoneEvent& b) {
    return std::tie(a.zone_id, a.track_id, a.kind) < std::tie(b.zone_id, b.track_id, b.kind);
  });
  return events;
}

nlohmann::ordered_json report_to_json(const OccupancyReport& report) {
  nlohmann::ordered_json zones = nlohmann::ordered_json::array();
  for (const ZoneCount& z : report.zones) {
    zones.push_back({{"id", z.zone_id}, {"count", z.count}, {"state", to_string(z.state)}});
  }
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const ZoneEvent& e : report.events) {
    events.push_back({{"zone", e.zone_id},
                      {"track", e.track_id},
                      {"kind", e.kind == EventKind::Enter ? "enter" : "leave"}});
  }
  nlohmann::ordered_json out;
  out["frame"] = report.frame_index;
  out["zones"] = std::move(zones);
  out["events"] = std::move(events);
  return out;
}

OccupancyPipeline::Step OccupancyPipeline::step(ZoneSet& zones, const DetectionFrame& frame,
                                                const CoordinateMapping& mapping) {
  Step out;
  out.report = evaluate_frame(zones, frame, mapping, options_);
  if (last_) {
    out.report.events = diff_events(*last_, out.report);
  } else {
    out.report.events = diff_events(OccupancyReport{}, out.report);
  }
  out.transitions = update_zone_states(zones, out.report);
  last_ = out.report;
  return out;
}

}  // namespace zonewatch
