#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zonewatch/geometry.hpp"
#include "zonewatch/trace.hpp"

namespace zonewatch {

// A walker that follows fixed waypoints once and then leaves the scene.
struct ScriptedWalker {
  std::vector<Point> waypoints;
  std::string class_name = "person";
};

struct SynthConfig {
  // Randomly wandering walkers, in addition to any scripted ones.
  std::size_t walker_count = 3;
  double speed_px_s = 60.0;
  // Standard deviation (px) of gaussian jitter added to every waypoint.
  double waypoint_noise = 0.0;
  std::int64_t duration_frames = 250;
  std::uint64_t seed = 1;
  double source_w = 640.0;
  double source_h = 480.0;
  double fps = 25.0;
  double box_w = 40.0;
  double box_h = 100.0;
  std::string class_name = "person";
  std::vector<ScriptedWalker> scripted;
};

// Throws ConfigError on invalid values.
void validate(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& doc);
nlohmann::json synth_config_to_json(const SynthConfig& cfg);

/// Deterministic synthetic detection stream.
///
/// Every walker is reported with a box of box_w x box_h centred on its
/// position, rounded to 1/100 px, with track id = walker index + 1 (scripted
/// walkers first). Positions advance by speed_px_s / fps per frame toward the
/// current waypoint; random walkers draw a fresh uniform waypoint when they
/// arrive, scripted walkers vanish after their last one. The output is a pure
/// function of the config.
Trace synth_scene(const SynthConfig& cfg);

}  // namespace zonewatch
