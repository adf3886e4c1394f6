#include "zonewatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "zonewatch/error.hpp"

namespace zonewatch {
namespace {

using nlohmann::json;

double round_cents(double v) { return std::round(v * 100.0) / 100.0; }

struct Walker {
  TrackId id = 0;
  std::string class_name;
  Point pos;
  std::vector<Point> route;  // remaining waypoints, scripted walkers only
  std::size_t next = 0;
  Point target;
  bool scripted = false;
  bool active = true;
  double score = 0.9;
};

class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}

  Point uniform_point(double w, double h) {
    std::uniform_real_distribution<double> ux(0.0, w);
    std::uniform_real_distribution<double> uy(0.0, h);
    const double x = ux(engine_);
    return {x, uy(engine_)};
  }

  Point jitter(Point p, double sigma, double w, double h) {
    if (sigma <= 0.0) return p;
    std::normal_distribution<double> n(0.0, sigma);
    const double dx = n(engine_);
    const double dy = n(engine_);
    return {std::clamp(p.x + dx, 0.0, w), std::clamp(p.y + dy, 0.0, h)};
  }

  double score() {
    std::uniform_real_distribution<double> u(0.5, 1.0);
    return round_cents(u(engine_));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

void validate(const SynthConfig& cfg) {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  check(std::isfinite(cfg.speed_px_s) && cfg.speed_px_s >= 0.0, "speed_px_s must be >= 0");
  check(std::isfinite(cfg.waypoint_noise) && cfg.waypoint_noise >= 0.0, "waypoint_noise must be >= 0");
  check(cfg.duration_frames >= 0, "duration_frames must be >= 0");
  check(std::isfinite(cfg.source_w) && cfg.source_w > 0.0, "source.width must be > 0");
  check(std::isfinite(cfg.source_h) && cfg.source_h > 0.0, "source.height must be > 0");
  check(std::isfinite(cfg.fps) && cfg.fps > 0.0, "fps must be > 0");
  check(std::isfinite(cfg.box_w) && cfg.box_w >= 0.0, "box.width must be >= 0");
  check(std::isfinite(cfg.box_h) && cfg.box_h >= 0.0, "box.height must be >= 0");
  for (const ScriptedWalker& w : cfg.scripted) check(!w.waypoints.empty(), "scripted walker needs waypoints");
}

SynthConfig synth_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("synth config must be a JSON object");
  SynthConfig cfg;
  try {
    cfg.walker_count = doc.value("walkers", cfg.walker_count);
    cfg.speed_px_s = doc.value("speed_px_s", cfg.speed_px_s);
    cfg.waypoint_noise = doc.value("waypoint_noise", cfg.waypoint_noise);
    cfg.duration_frames = doc.value("duration_frames", cfg.duration_frames);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.fps = doc.value("fps", cfg.fps);
    cfg.class_name = doc.value("class", cfg.class_name);
    if (doc.contains("source")) {
      cfg.source_w = doc["source"].at("width").get<double>();
      cfg.source_h = doc["source"].at("height").get<double>();
    }
    if (doc.contains("box")) {
      cfg.box_w = doc["box"].at("width").get<double>();
      cfg.box_h = doc["box"].at("height").get<double>();
    }
    if (doc.contains("scripted")) {
      for (const json& s : doc["scripted"]) {
        ScriptedWalker w;
        w.class_name = s.value("class", w.class_name);
        for (const json& p : s.at("waypoints")) w.waypoints.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        cfg.scripted.push_back(std::move(w));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid synth config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

json synth_config_to_json(const SynthConfig& cfg) {
  json scripted = json::array();
  for (const ScriptedWalker& w : cfg.scripted) {
    json pts = json::array();
    for (const Point& p : w.waypoints) pts.push_back({p.x, p.y});
    scripted.push_back({{"class", w.class_name}, {"waypoints", std::move(pts)}});
  }
  return {{"walkers", cfg.walker_count},
          {"speed_px_s", cfg.speed_px_s},
          {"waypoint_noise", cfg.waypoint_noise},
          {"duration_frames", cfg.duration_frames},
          {"seed", cfg.seed},
          {"fps", cfg.fps},
          {"class", cfg.class_name},
          {"source", {{"width", cfg.source_w}, {"height", cfg.source_h}}},
          {"box", {{"width", cfg.box_w}, {"height", cfg.box_h}}},
          {"scripted", std::move(scripted)}};
}

Trace synth_scene(const SynthConfig& cfg) {
  validate(cfg);
  SceneRng rng(cfg.seed);
  const double w = cfg.source_w;
  const double h = cfg.source_h;

  std::vector<Walker> walkers;
  TrackId next_id = 1;
  for (const ScriptedWalker& s : cfg.scripted) {
    Walker wk;
    wk.id = next_id++;
    wk.class_name = s.class_name;
    wk.scripted = true;
    for (const Point& p : s.waypoints) wk.route.push_back(rng.jitter(p, cfg.waypoint_noise, w, h));
    wk.pos = wk.route.front();
    wk.next = 1;
    wk.active = true;
    walkers.push_back(std::move(wk));
  }
  for (std::size_t i = 0; i < cfg.walker_count; ++i) {
    Walker wk;
    wk.id = next_id++;
    wk.class_name = cfg.class_name;
    wk.pos = rng.uniform_point(w, h);
    wk.target = rng.jitter(rng.uniform_point(w, h), cfg.waypoint_noise, w, h);
    wk.score = rng.score();
    walkers.push_back(std::move(wk));
  }

  Trace out;
  out.header.source_w = w;
  out.header.source_h = h;
  out.header.fps_hint = cfg.fps;
  const double step = cfg.speed_px_s / cfg.fps;

  for (std::int64_t f = 0; f < cfg.duration_frames; ++f) {
    DetectionFrame frame;
    frame.frame_index = f;
    frame.t_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(f) * 1000.0 / cfg.fps));
    frame.source_w = w;
    frame.source_h = h;

    for (Walker& wk : walkers) {
      if (!wk.active) continue;
      const double cx = round_cents(wk.pos.x);
      const double cy = round_cents(wk.pos.y);
      Detection d;
      d.class_name = wk.class_name;
      d.bbox = {round_cents(cx - cfg.box_w / 2.0), round_cents(cy - cfg.box_h / 2.0),
                round_cents(cx + cfg.box_w / 2.0), round_cents(cy + cfg.box_h / 2.0)};
      d.score = wk.score;
      d.track_id = wk.id;
      frame.detections.push_back(std::move(d));

      // Advance, possibly through several waypoints in one frame.
      double budget = step;
      while (budget > 0.0 && wk.active) {
        if (wk.scripted) {
          if (wk.next >= wk.route.size()) {
            wk.active = false;
            break;
          }
          wk.target = wk.route[wk.next];
        }
        const double dx = wk.target.x - wk.pos.x;
        const double dy = wk.target.y - wk.pos.y;
        const double dist = std::hypot(dx, dy);
        if (dist > budget) {
          wk.pos = {wk.pos.x + dx / dist * budget, wk.pos.y + dy / dist * budget};
          budget = 0.0;
        } else {
          wk.pos = wk.target;
          budget -= dist;
          if (wk.scripted) {
            ++wk.next;
          } else {
            wk.target = rng.jitter(rng.uniform_point(w, h), cfg.waypoint_noise, w, h);
          }
        }
      }
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace zonewatch
