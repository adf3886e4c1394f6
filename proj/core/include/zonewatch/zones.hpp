#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "zonewatch/geometry.hpp"

namespace zonewatch {

using ZoneId = std::uint32_t;

enum class ZoneState { Vacant, Occupied };

const char* to_string(ZoneState state) noexcept;

// One committed detecting area. The chain is fixed at construction; only the
// occupancy state changes over the zone's lifetime.
class Zone {
 public:
  // Throws ZoneFileError if the chain has fewer than two vertices.
  Zone(ZoneId id, PolylineChain chain, std::int64_t created_at = 0);

  ZoneId id() const noexcept { return id_; }
  std::span<const Point> chain() const noexcept { return chain_; }
  const BBox& bounds() const noexcept { return bounds_; }
  ZoneState state() const noexcept { return state_; }
  std::int64_t created_at() const noexcept { return created_at_; }

  void set_state(ZoneState s) noexcept { state_ = s; }

 private:
  ZoneId id_;
  PolylineChain chain_;
  BBox bounds_;
  ZoneState state_ = ZoneState::Vacant;
  std::int64_t created_at_;
};

struct ZoneSet {
  std::vector<Zone> zones;
  // Bumped on every commit, clear and load. Never decreases.
  std::uint64_t revision = 0;

  const Zone* find(ZoneId id) const noexcept;
};

// Source-frame pixels to display (canvas) pixels by independent x/y scaling.
class CoordinateMapping {
 public:
  // Throws InvalidMapping unless all extents are finite and > 0.
  CoordinateMapping(double source_w, double source_h, double display_w, double display_h);

  static CoordinateMapping identity(double w, double h) { return {w, h, w, h}; }

  double source_w() const noexcept { return source_w_; }
  double source_h() const noexcept { return source_h_; }
  double display_w() const noexcept { return display_w_; }
  double display_h() const noexcept { return display_h_; }
  double scale_w() const noexcept { return scale_w_; }
  double scale_h() const noexcept { return scale_h_; }

  Point to_display(Point source) const noexcept { return {source.x * scale_w_, source.y * scale_h_}; }
  Point to_source(Point display) const noexcept { return {display.x / scale_w_, display.y / scale_h_}; }

  friend bool operator==(const CoordinateMapping&, const CoordinateMapping&) = default;

 private:
  double source_w_;
  double source_h_;
  double display_w_;
  double display_h_;
  double scale_w_;
  double scale_h_;
};

inline Point map_source_to_display(const CoordinateMapping& m, Point p) noexcept { return m.to_display(p); }

struct DrawingOptions {
  // Minimum distance between consecutive recorded vertices. 0 records every move.
  double decimation_px = 2.0;
  // Append the first vertex to the chain when a stroke is committed.
  bool auto_close = false;
};

/// Press / drag / release drawing state machine plus the committed zone set.
///
/// begin_stroke records the press point, extend_stroke appends drag points
/// (decimated), and commit_stroke turns the stroke into a zone if it has at
/// least one segment. A stroke cannot be cancelled; only commit or clear_all
/// empty it. Single writer: callers serialize mutations.
class DrawingSession {
 public:
  explicit DrawingSession(DrawingOptions options = {});

  // Throws StrokeAlreadyOpen while drawing.
  void begin_stroke(Point p);
  // Throws NoOpenStroke when idle. Points closer than decimation_px to the
  // last vertex are ignored.
  void extend_stroke(Point p);
  // Returns the new zone's id, or nothing if idle or the stroke has < 2 vertices.
  std::optional<ZoneId> commit_stroke(std::int64_t frame_index = 0);
  void clear_all();

  // Replaces the zone set (ids kept as given) and ends any open stroke.
  void replace_zones(std::vector<Zone> zones);

  bool drawing() const noexcept { return drawing_; }
  std::span<const Point> stroke() const noexcept { return stroke_; }
  const ZoneSet& zones() const noexcept { return zones_; }
  ZoneSet& zones() noexcept { return zones_; }
  const DrawingOptions& options() const noexcept { return options_; }
  ZoneId next_id() const noexcept { return next_id_; }

  // Immutable copy for evaluators running off the writer thread.
  std::shared_ptr<const ZoneSet> snapshot() const { return std::make_shared<const ZoneSet>(zones_); }

 private:
  DrawingOptions options_;
  PolylineChain stroke_;
  bool drawing_ = false;
  ZoneSet zones_;
  ZoneId next_id_ = 1;
};

// Zone file: {"display":{"width":W,"height":H},"zones":[{"id":1,"points":[[x,y],...]}]}
struct ZoneFile {
  double display_w = 0.0;
  double display_h = 0.0;
  std::vector<Zone> zones;
};

// Throws ZoneFileError on schema violations or duplicate ids.
ZoneFile zone_file_from_json(const nlohmann::json& doc);
nlohmann::json zone_file_to_json(double display_w, double display_h, std::span<const Zone> zones);

// Throws IoError if unreadable, ZoneFileError if malformed.
ZoneFile load_zone_file(const std::filesystem::path& path);
void save_zone_file(const std::filesystem::path& path, double display_w, double display_h,
                    std::span<const Zone> zones);

}  // namespace zonewatch
