#include "zonewatch/session.hpp"

#include <cmath>

#include "zonewatch/error.hpp"

namespace zonewatch {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double display_extent(double configured, double fallback) { return configured > 0.0 ? configured : fallback; }

Point read_point(const json& msg) {
  if (!msg.contains("x") || !msg.contains("y") || !msg["x"].is_number() || !msg["y"].is_number()) {
    throw ConfigError("message needs numeric x and y");
  }
  const Point p{msg["x"].get<double>(), msg["y"].get<double>()};
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ConfigError("x and y must be finite");
  return p;
}

Outbound to_sender(std::string payload) { return {Outbound::Target::Sender, std::move(payload)}; }
Outbound to_all(std::string payload) { return {Outbound::Target::All, std::move(payload)}; }

}  // namespace

std::string error_message(std::string_view detail) {
  ordered_json out;
  out["type"] = "error";
  out["detail"] = std::string(detail);
  return out.dump();
}

SessionCore::SessionCore(SessionConfig config)
    : config_(std::move(config)),
      drawing_(config_.drawing),
      mapping_(config_.source_w, config_.source_h, display_extent(config_.display_w, config_.source_w),
               display_extent(config_.display_h, config_.source_h)),
      pipeline_(config_.engine) {
  if (config_.initial_zones) {
    mapping_ = CoordinateMapping(config_.source_w, config_.source_h, config_.initial_zones->display_w,
                                 config_.initial_zones->display_h);
    drawing_.replace_zones(config_.initial_zones->zones);
  }
}

std::vector<Outbound> SessionCore::handle_client_message(std::string_view text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& e) {
    return {to_sender(error_message(std::string("malformed JSON: ") + e.what()))};
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return {to_sender(error_message("message must be an object with a string \"type\""))};
  }
  const std::string type = msg["type"].get<std::string>();
  try {
    return dispatch(type, msg);
  } catch (const Error& e) {
    return {to_sender(error_message(e.what()))};
  } catch (const json::exception& e) {
    return {to_sender(error_message(e.what()))};
  }
}

std::vector<Outbound> SessionCore::dispatch(const std::string& type, const json& msg) {
  if (type == "stroke_begin") {
    drawing_.begin_stroke(read_point(msg));
    return {};
  }
  if (type == "stroke_move") {
    if (msg.contains("points")) {
      if (!msg["points"].is_array()) throw ConfigError("points must be an array of [x,y]");
      std::vector<Point> batch;
      for (const json& p : msg["points"]) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
          throw ConfigError("points must be an array of [x,y]");
        }
        batch.push_back({p[0].get<double>(), p[1].get<double>()});
      }
      if (!drawing_.drawing()) throw NoOpenStroke();
      for (const Point& p : batch) drawing_.extend_stroke(p);
    } else {
      drawing_.extend_stroke(read_point(msg));
    }
    return {};
  }
  if (type == "stroke_end") {
    if (drawing_.commit_stroke(last_frame_.value_or(0))) return {to_all(zones_message())};
    return {};
  }
  if (type == "clear") {
    drawing_.clear_all();
    return {to_all(zones_message())};
  }
  if (type == "set_config") {
    double display_w = mapping_.display_w();
    double display_h = mapping_.display_h();
    EngineOptions options = pipeline_.options();
    if (msg.contains("canvas")) {
      const json& c = msg["canvas"];
      if (!c.is_object() || !c.contains("width") || !c.contains("height") || !c["width"].is_number() ||
          !c["height"].is_number()) {
        throw ConfigError("canvas must be {\"width\":W,\"height\":H}");
      }
      display_w = c["width"].get<double>();
      display_h = c["height"].get<double>();
    }
    if (msg.contains("keypoint")) options.keypoint = parse_keypoint_mode(msg["keypoint"].get<std::string>());
    if (msg.contains("classes")) options.class_allowlist = msg["classes"].get<std::vector<std::string>>();
    if (msg.contains("min_score")) {
      options.min_score = msg["min_score"].get<double>();
      if (!(options.min_score >= 0.0 && options.min_score <= 1.0)) throw ConfigError("min_score must be in [0,1]");
    }
    if (msg.contains("prefilter")) options.prefilter = msg["prefilter"].get<bool>() ? Prefilter::On : Prefilter::Off;

    CoordinateMapping mapping(mapping_.source_w(), mapping_.source_h(), display_w, display_h);
    mapping_ = mapping;
    pipeline_.set_options(std::move(options));
    return {to_sender(zones_message())};
  }
  if (type == "load_zones") {
    if (!msg.contains("zones")) throw ConfigError("load_zones needs a zones field");
    const json& payload = msg["zones"];
    ZoneFile file;
    if (payload.is_object()) {
      file = zone_file_from_json(payload);
    } else {
      json doc = {{"display", {{"width", mapping_.display_w()}, {"height", mapping_.display_h()}}},
                  {"zones", payload}};
      file = zone_file_from_json(doc);
    }
    CoordinateMapping mapping(mapping_.source_w(), mapping_.source_h(), file.display_w, file.display_h);
    drawing_.replace_zones(std::move(file.zones));
    mapping_ = mapping;
    return {to_all(zones_message())};
  }
  if (type == "save_zones") {
    return {to_sender(zones_message())};
  }
  throw ConfigError("unknown message type '" + type + "'");
}

std::string SessionCore::zones_message() const {
  ordered_json zones = ordered_json::array();
  for (const Zone& z : drawing_.zones().zones) {
    ordered_json pts = ordered_json::array();
    for (const Point& p : z.chain()) pts.push_back({p.x, p.y});
    ordered_json entry;
    entry["id"] = z.id();
    entry["points"] = std::move(pts);
    entry["state"] = to_string(z.state());
    zones.push_back(std::move(entry));
  }
  ordered_json out;
  out["type"] = "zones";
  out["revision"] = drawing_.zones().revision;
  out["display"] = {{"width", mapping_.display_w()}, {"height", mapping_.display_h()}};
  out["drawing"] = drawing_.drawing();
  out["zones"] = std::move(zones);
  return out.dump();
}

std::string SessionCore::report_message(const OccupancyReport& report, const std::vector<Point>& keypoints) const {
  ordered_json out;
  out["type"] = "report";
  const ordered_json body = report_to_json(report);
  for (const auto& [key, value] : body.items()) out[key] = value;
  ordered_json pts = ordered_json::array();
  for (const Point& p : keypoints) pts.push_back({p.x, p.y});
  out["keypoints"] = std::move(pts);
  return out.dump();
}

FrameOutput SessionCore::on_frame(const DetectionFrame& frame) {
  FrameOutput out;
  if (last_frame_ && frame.frame_index <= *last_frame_) {
    ++dropped_frames_;
    return out;
  }
  try {
    if (frame.source_w != mapping_.source_w() || frame.source_h != mapping_.source_h()) {
      mapping_ = CoordinateMapping(frame.source_w, frame.source_h, mapping_.display_w(), mapping_.display_h());
    }
    auto step = pipeline_.step(drawing_.zones(), frame, mapping_);
    last_frame_ = frame.frame_index;

    std::vector<Point> keypoints;
    for (const Detection& d : frame.detections) {
      if (pipeline_.options().accepts(d)) {
        keypoints.push_back(mapping_.to_display(keypoint_of(d, pipeline_.options().keypoint)));
      }
    }
    if (frame.image_b64) {
      if (auto msg = forward_frame(*frame.image_b64, frame.frame_index)) out.broadcasts.push_back(std::move(*msg));
    }
    last_report_message_ = report_message(step.report, keypoints);
    out.broadcasts.push_back(last_report_message_);
    out.report_line = report_to_json(step.report).dump();
  } catch (const Error&) {
    ++evaluator_errors_;
    ++dropped_frames_;
  }
  return out;
}

std::optional<std::string> SessionCore::forward_frame(std::string_view image_b64, std::int64_t frame_index) {
  if (image_b64.empty() || image_b64.size() > config_.max_frame_bytes) {
    ++dropped_images_;
    return std::nullopt;
  }
  ordered_json out;
  out["type"] = "frame";
  out["frame"] = frame_index;
  out["image_b64"] = std::string(image_b64);
  return out.dump();
}

std::vector<std::string> SessionCore::join_messages() const {
  std::vector<std::string> out{zones_message()};
  if (!last_report_message_.empty()) out.push_back(last_report_message_);
  return out;
}

}  // namespace zonewatch
