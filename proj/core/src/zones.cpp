#include "zonewatch/zones.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "zonewatch/error.hpp"

namespace zonewatch {
namespace {

using nlohmann::json;

double positive_extent(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ZoneFileError(std::string("display.") + key + " must be a number");
  }
  const double v = obj[key].get<double>();
  if (!std::isfinite(v) || v <= 0.0) throw ZoneFileError(std::string("display.") + key + " must be > 0");
  return v;
}

}  // namespace

const char* to_string(ZoneState state) noexcept {
  return state == ZoneState::Occupied ? "occupied" : "vacant";
}

Zone::Zone(ZoneId id, PolylineChain chain, std::int64_t created_at)
    : id_(id), chain_(std::move(chain)), created_at_(created_at) {
  if (chain_.size() < 2) throw ZoneFileError("zone " + std::to_string(id) + " needs at least 2 vertices");
  bounds_ = bounding_box(chain_);
}

const Zone* ZoneSet::find(ZoneId id) const noexcept {
  for (const Zone& z : zones) {
    if (z.id() == id) return &z;
  }
  return nullptr;
}

CoordinateMapping::CoordinateMapping(double source_w, double source_h, double display_w, double display_h)
    : source_w_(source_w), source_h_(source_h), display_w_(display_w), display_h_(display_h) {
  for (double v : {source_w, source_h, display_w, display_h}) {
    if (!std::isfinite(v) || v <= 0.0) throw InvalidMapping("mapping extents must be finite and > 0");
  }
  scale_w_ = display_w_ / source_w_;
  scale_h_ = display_h_ / source_h_;
  if (!std::isfinite(scale_w_) || !std::isfinite(scale_h_) || scale_w_ <= 0.0 || scale_h_ <= 0.0) {
    throw InvalidMapping("mapping scale is not finite");
  }
}

DrawingSession::DrawingSession(DrawingOptions options) : options_(options) {
  if (!std::isfinite(options_.decimation_px) || options_.decimation_px < 0.0) {
    throw ConfigError("decimation_px must be >= 0");
  }
}

void DrawingSession::begin_stroke(Point p) {
  if (drawing_) throw StrokeAlreadyOpen();
  drawing_ = true;
  stroke_.assign(1, p);
}

void DrawingSession::extend_stroke(Point p) {
  if (!drawing_) throw NoOpenStroke();
  const Point last = stroke_.back();
  if (std::hypot(p.x - last.x, p.y - last.y) < options_.decimation_px) return;
  stroke_.push_back(p);
}

std::optional<ZoneId> DrawingSession::commit_stroke(std::int64_t frame_index) {
  if (!drawing_) return std::nullopt;
  drawing_ = false;
  PolylineChain chain = std::move(stroke_);
  stroke_.clear();
  if (chain.size() < 2) return std::nullopt;
  if (options_.auto_close && chain.front() != chain.back()) chain.push_back(chain.front());

  const ZoneId id = next_id_++;
  zones_.zones.emplace_back(id, std::move(chain), frame_index);
  ++zones_.revision;
  return id;
}

void DrawingSession::clear_all() {
  zones_.zones.clear();
  stroke_.clear();
  drawing_ = false;
  next_id_ = 1;
  ++zones_.revision;
}

void DrawingSession::replace_zones(std::vector<Zone> zones) {
  stroke_.clear();
  drawing_ = false;
  ZoneId max_id = 0;
  for (const Zone& z : zones) max_id = std::max(max_id, z.id());
  zones_.zones = std::move(zones);
  next_id_ = max_id + 1;
  ++zones_.revision;
}

ZoneFile zone_file_from_json(const json& doc) {
  if (!doc.is_object()) throw ZoneFileError("zone file must be a JSON object");
  if (!doc.contains("display") || !doc["display"].is_object()) throw ZoneFileError("missing display object");
  ZoneFile out;
  out.display_w = positive_extent(doc["display"], "width");
  out.display_h = positive_extent(doc["display"], "height");

  if (!doc.contains("zones") || !doc["zones"].is_array()) throw ZoneFileError("missing zones array");
  std::set<ZoneId> seen;
  ZoneId previous = 0;
  for (const json& z : doc["zones"]) {
    if (!z.is_object() || !z.contains("id") || !z["id"].is_number_unsigned()) {
      throw ZoneFileError("zone entry needs a positive integer id");
    }
    const auto id = z["id"].get<ZoneId>();
    if (id == 0) throw ZoneFileError("zone id must be >= 1");
    if (!seen.insert(id).second) throw ZoneFileError("duplicate zone id " + std::to_string(id));
    if (id < previous) throw ZoneFileError("zone ids must be listed in ascending order");
    previous = id;

    if (!z.contains("points") || !z["points"].is_array()) {
      throw ZoneFileError("zone " + std::to_string(id) + " is missing points");
    }
    PolylineChain chain;
    for (const json& pt : z["points"]) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        throw ZoneFileError("zone " + std::to_string(id) + " has a malformed point");
      }
      const Point p{pt[0].get<double>(), pt[1].get<double>()};
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ZoneFileError("zone " + std::to_string(id) + " has a non-finite point");
      }
      chain.push_back(p);
    }
    out.zones.emplace_back(id, std::move(chain));
  }
  return out;
}

json zone_file_to_json(double display_w, double display_h, std::span<const Zone> zones) {
  json list = json::array();
  for (const Zone& z : zones) {
    json pts = json::array();
    for (const Point& p : z.chain()) pts.push_back({p.x, p.y});
    list.push_back({{"id", z.id()}, {"points", std::move(pts)}});
  }
  return {{"display", {{"width", display_w}, {"height", display_h}}}, {"zones", std::move(list)}};
}

ZoneFile load_zone_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open zone file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ZoneFileError("zone file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return zone_file_from_json(doc);
}

void save_zone_file(const std::filesystem::path& path, double display_w, double display_h,
                    std::span<const Zone> zones) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write zone file '" + path.string() + "'");
  out << zone_file_to_json(display_w, display_h, zones).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace zonewatch
