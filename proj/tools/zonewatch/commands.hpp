#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "zonewatch/engine.hpp"

namespace zonewatch::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;

struct AnalyzeOptions {
  std::filesystem::path zones_path;
  std::filesystem::path trace_path;
  std::filesystem::path out_path;
  EngineOptions engine;
};

// One report line per frame, then a {"type":"summary"} line.
int cmd_analyze(const AnalyzeOptions& options, std::ostream& diag);

struct SourceSpec {
  enum class Kind { Trace, Adapter, Synth };
  Kind kind = Kind::Trace;
  std::string value;  // path, or HOST:PORT
};

// "trace:PATH", "adapter:HOST:PORT" or "synth:CONFIG.json". Throws ConfigError.
SourceSpec parse_source_spec(const std::string& text);

struct ServeOptions {
  std::string address = "0.0.0.0";
  std::uint16_t port = 8800;
  std::string source;
  std::optional<std::filesystem::path> zones_path;
  std::optional<std::filesystem::path> out_path;
  std::filesystem::path static_dir;
  EngineOptions engine;
  // Replay rate multiplier for trace/synth sources; 0 replays unthrottled.
  double speed = 1.0;
  // Source size assumed for adapter frames that do not carry one.
  double adapter_w = 640.0;
  double adapter_h = 480.0;
  bool exit_on_end = false;
};

// Runs until SIGINT/SIGTERM (or source end with exit_on_end).
int cmd_serve(const ServeOptions& options, std::ostream& diag);

int cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_path, std::ostream& diag);

struct BenchOptions {
  std::size_t zones = 16;
  std::size_t vertices = 32;
  std::size_t points = 100000;
  std::size_t detections = 50;
  bool prefilter = true;
  // Sample points only outside every zone's bounding box.
  bool outside_only = false;
  std::uint64_t seed = 7;
};

struct BenchMode {
  Prefilter prefilter = Prefilter::On;
  double evals_per_sec = 0.0;
  double frame_latency_us = 0.0;
  std::size_t inside_hits = 0;
};

struct BenchResult {
  BenchMode on;
  BenchMode off;
};

// Throws ConfigError if any size is zero.
BenchResult run_bench(const BenchOptions& options);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& diag);

// Full command-line entry point.
int run(int argc, char** argv);

}  // namespace zonewatch::cli
