#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zonewatch/adapter.hpp"
#include "zonewatch/error.hpp"
#include "zonewatch/server.hpp"
#include "zonewatch/synth.hpp"
#include "zonewatch/trace.hpp"
#include "zonewatch/zones.hpp"

namespace zonewatch::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct ZoneStats {
  std::size_t max_count = 0;
  double total = 0.0;
  std::size_t occupied_frames = 0;
};

std::vector<std::string> split_classes(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > start) out.push_back(text.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Star-shaped closed polygon: sorted angles, random radii.
PolylineChain star_polygon(std::mt19937_64& rng, Point center, double radius, std::size_t vertices) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> scale(0.35, 1.0);
  std::vector<double> angles(vertices);
  for (double& a : angles) a = angle(rng);
  std::sort(angles.begin(), angles.end());
  PolylineChain chain;
  for (double a : angles) {
    const double r = radius * scale(rng);
    chain.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  chain.push_back(chain.front());
  return chain;
}

template <typename Fn>
double per_second(std::size_t work_per_call, Fn&& fn) {
  const auto min_elapsed = std::chrono::milliseconds(100);
  std::size_t calls = 0;
  const auto start = Clock::now();
  auto elapsed = Clock::duration::zero();
  do {
    fn();
    ++calls;
    elapsed = Clock::now() - start;
  } while (elapsed < min_elapsed);
  const double seconds = std::chrono::duration<double>(elapsed).count();
  return static_cast<double>(calls * work_per_call) / seconds;
}

}  // namespace

int cmd_analyze(const AnalyzeOptions& options, std::ostream& diag) {
  try {
    const ZoneFile zone_file = load_zone_file(options.zones_path);
    TraceReader reader(options.trace_path);
    const CoordinateMapping mapping(reader.header().source_w, reader.header().source_h, zone_file.display_w,
                                    zone_file.display_h);
    ZoneSet zones;
    zones.zones = zone_file.zones;
    zones.revision = 1;

    std::ofstream out(options.out_path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot open '" + options.out_path.string() + "' for writing");

    OccupancyPipeline pipeline(options.engine);
    std::vector<ZoneStats> stats(zones.zones.size());
    std::size_t frames = 0;
    while (auto frame = reader.next()) {
      const auto step = pipeline.step(zones, *frame, mapping);
      out << report_to_json(step.report).dump() << '\n';
      for (std::size_t i = 0; i < step.report.zones.size(); ++i) {
        const ZoneCount& z = step.report.zones[i];
        stats[i].max_count = std::max(stats[i].max_count, z.count);
        stats[i].total += static_cast<double>(z.count);
        if (z.state == ZoneState::Occupied) ++stats[i].occupied_frames;
      }
      ++frames;
    }

    ordered_json summary;
    summary["type"] = "summary";
    summary["frames"] = frames;
    ordered_json zone_summaries = ordered_json::array();
    for (std::size_t i = 0; i < zones.zones.size(); ++i) {
      ordered_json z;
      z["id"] = zones.zones[i].id();
      z["max_count"] = stats[i].max_count;
      z["mean_count"] = frames ? stats[i].total / static_cast<double>(frames) : 0.0;
      z["occupied_fraction"] =
          frames ? static_cast<double>(stats[i].occupied_frames) / static_cast<double>(frames) : 0.0;
      zone_summaries.push_back(std::move(z));
    }
    summary["zones"] = std::move(zone_summaries);
    out << summary.dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failed for '" + options.out_path.string() + "'");
    return kExitOk;
  } catch (const Error& e) {
    diag << "zonewatch analyze: " << e.what() << '\n';
    return kExitBadInput;
  }
}

SourceSpec parse_source_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon + 1 == text.size()) {
    throw ConfigError("source must be trace:PATH, adapter:HOST:PORT or synth:CONFIG");
  }
  const std::string kind = text.substr(0, colon);
  SourceSpec spec;
  spec.value = text.substr(colon + 1);
  if (kind == "trace") {
    spec.kind = SourceSpec::Kind::Trace;
  } else if (kind == "adapter") {
    spec.kind = SourceSpec::Kind::Adapter;
    parse_endpoint(spec.value);
  } else if (kind == "synth") {
    spec.kind = SourceSpec::Kind::Synth;
  } else {
    throw ConfigError("unknown source kind '" + kind + "'");
  }
  return spec;
}

int cmd_serve(const ServeOptions& options, std::ostream& diag) {
  // Signals are collected by sigtimedwait below; block them before any thread starts.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);
  struct MaskRestore {
    sigset_t mask;
    ~MaskRestore() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  std::optional<Trace> replay;
  std::unique_ptr<DetectionAdapter> adapter;
  SessionConfig session;
  session.engine = options.engine;
  try {
    const SourceSpec spec = parse_source_spec(options.source);
    switch (spec.kind) {
      case SourceSpec::Kind::Trace:
        replay = read_trace(spec.value);
        break;
      case SourceSpec::Kind::Synth: {
        std::ifstream in(spec.value);
        if (!in) throw IoError("cannot open synth config '" + spec.value + "'");
        json doc;
        try {
          doc = json::parse(in);
        } catch (const json::parse_error& e) {
          throw ConfigError(std::string("synth config is not valid JSON: ") + e.what());
        }
        replay = synth_scene(synth_config_from_json(doc));
        break;
      }
      case SourceSpec::Kind::Adapter:
        adapter = std::make_unique<DetectionAdapter>(parse_endpoint(spec.value), options.adapter_w, options.adapter_h);
        break;
    }
    if (replay) {
      session.source_w = replay->header.source_w;
      session.source_h = replay->header.source_h;
    } else {
      session.source_w = options.adapter_w;
      session.source_h = options.adapter_h;
    }
    if (options.zones_path) {
      session.initial_zones = load_zone_file(*options.zones_path);
    }
    if (!(options.speed >= 0.0)) throw ConfigError("--speed must be >= 0");
  } catch (const Error& e) {
    diag << "zonewatch serve: " << e.what() << '\n';
    return kExitBadInput;
  }

  std::ofstream report_out;
  if (options.out_path) {
    report_out.open(*options.out_path, std::ios::trunc | std::ios::binary);
    if (!report_out) {
      diag << "zonewatch serve: cannot open '" << options.out_path->string() << "' for writing\n";
      return kExitBadInput;
    }
  }

  std::unique_ptr<Server> server;
  try {
    ServerOptions server_options;
    server_options.address = options.address;
    server_options.port = options.port;
    server_options.static_dir = options.static_dir;
    server = std::make_unique<Server>(session, server_options);
  } catch (const Error& e) {
    diag << "zonewatch serve: " << e.what() << '\n';
    return kExitBadInput;
  }
  if (report_out.is_open()) {
    server->set_report_sink([&report_out](const std::string& line) { report_out << line << '\n'; });
  }
  server->start();
  diag << "zonewatch serve: listening on " << options.address << ':' << server->port() << '\n';

  std::atomic<bool> source_done{false};
  std::atomic<bool> stop_source{false};
  std::thread source;
  if (replay) {
    source = std::thread([&] {
      const double fps = replay->header.fps_hint.value_or(25.0);
      const auto start = Clock::now();
      std::size_t n = 0;
      for (DetectionFrame& f : replay->frames) {
        if (stop_source) break;
        if (options.speed > 0.0) {
          const auto due = start + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(static_cast<double>(n) / (fps * options.speed)));
          while (!stop_source && Clock::now() < due) std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
        server->submit_frame(std::move(f));
        ++n;
      }
      server->drain();
      source_done = true;
    });
  } else {
    source = std::thread([&] {
      adapter->run([&](DetectionFrame f) { server->submit_frame(std::move(f)); });
      source_done = true;
    });
  }

  const timespec tick{0, 100'000'000};
  for (;;) {
    if (sigtimedwait(&signals, nullptr, &tick) > 0) break;
    if (options.exit_on_end && source_done) break;
  }

  stop_source = true;
  if (adapter) adapter->stop();
  source.join();
  server->stop();
  if (report_out.is_open()) report_out.flush();
  diag << "zonewatch serve: stopped after " << server->stats().frames << " frames\n";
  return kExitOk;
}

int cmd_simulate(const std::filesystem::path& config_path, const std::filesystem::path& out_path, std::ostream& diag) {
  try {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config '" + config_path.string() + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const Trace trace = synth_scene(synth_config_from_json(doc));
    write_trace(out_path, trace.header, trace.frames);
    return kExitOk;
  } catch (const Error& e) {
    diag << "zonewatch simulate: " << e.what() << '\n';
    return kExitBadInput;
  }
}

BenchResult run_bench(const BenchOptions& options) {
  if (options.zones == 0 || options.vertices < 3 || options.points == 0 || options.detections == 0) {
    throw ConfigError("bench sizes must be > 0 (and vertices >= 3)");
  }
  constexpr double kWidth = 1920.0;
  constexpr double kHeight = 1080.0;
  std::mt19937_64 rng(options.seed);

  // Zones on a square-ish grid so their boxes cover a fraction of the canvas.
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(options.zones))));
  const std::size_t rows = (options.zones + cols - 1) / cols;
  const double cell_w = kWidth / static_cast<double>(cols);
  const double cell_h = kHeight / static_cast<double>(rows);
  ZoneSet zones;
  for (std::size_t i = 0; i < options.zones; ++i) {
    const Point center{(static_cast<double>(i % cols) + 0.5) * cell_w, (static_cast<double>(i / cols) + 0.5) * cell_h};
    zones.zones.emplace_back(static_cast<ZoneId>(i + 1),
                             star_polygon(rng, center, 0.4 * std::min(cell_w, cell_h), options.vertices));
  }

  std::uniform_real_distribution<double> ux(0.0, kWidth);
  std::uniform_real_distribution<double> uy(0.0, kHeight);
  auto outside_all = [&](Point p) {
    return std::none_of(zones.zones.begin(), zones.zones.end(), [&](const Zone& z) { return z.bounds().contains(p); });
  };
  std::vector<Point> points;
  points.reserve(options.points);
  while (points.size() < options.points) {
    const Point p{ux(rng), uy(rng)};
    if (!options.outside_only || outside_all(p)) points.push_back(p);
  }

  DetectionFrame frame;
  frame.source_w = kWidth;
  frame.source_h = kHeight;
  for (std::size_t i = 0; i < options.detections; ++i) {
    const Point c = points[i % points.size()];
    frame.detections.push_back({"person", {c.x - 10.0, c.y - 20.0, c.x + 10.0, c.y + 20.0}, 0.9, std::nullopt});
  }
  const auto mapping = CoordinateMapping::identity(kWidth, kHeight);

  auto measure = [&](Prefilter mode) {
    BenchMode m;
    m.prefilter = mode;
    std::size_t hits = 0;
    m.evals_per_sec = per_second(zones.zones.size() * points.size(), [&] {
      for (const Zone& z : zones.zones) {
        for (const Point& p : points) hits += point_in_zone(p, z.chain(), z.bounds(), mode) ? 1 : 0;
      }
    });
    for (const Zone& z : zones.zones) {
      for (const Point& p : points) m.inside_hits += point_in_zone(p, z.chain(), z.bounds(), mode) ? 1 : 0;
    }
    EngineOptions engine;
    engine.prefilter = mode;
    std::size_t sink = 0;
    const double frames_per_sec = per_second(1, [&] { sink += evaluate_frame(zones, frame, mapping, engine).zones.size(); });
    m.frame_latency_us = 1e6 / frames_per_sec;
    // Keeps the timed loops observable.
    static volatile std::size_t keep;
    keep = hits + sink;
    return m;
  };
  return {measure(Prefilter::On), measure(Prefilter::Off)};
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& diag) {
  BenchResult result;
  try {
    result = run_bench(options);
  } catch (const Error& e) {
    diag << "zonewatch bench: " << e.what() << '\n';
    return kExitBadInput;
  }
  auto mode_json = [](const BenchMode& m) {
    ordered_json j;
    j["prefilter"] = m.prefilter == Prefilter::On ? "on" : "off";
    j["evals_per_sec"] = m.evals_per_sec;
    j["frame_latency_us"] = m.frame_latency_us;
    return j;
  };
  ordered_json report;
  report["type"] = "bench";
  report["zones"] = options.zones;
  report["vertices"] = options.vertices;
  report["points"] = options.points;
  report["detections_per_frame"] = options.detections;
  report["selected"] = options.prefilter ? "on" : "off";
  report["modes"] = {mode_json(result.on), mode_json(result.off)};
  out << report.dump() << '\n';
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"zonewatch: multi-zone occupancy counting over detection streams"};
  app.require_subcommand(1);

  std::string keypoint = "center";
  bool no_prefilter = false;
  std::string classes = "person";
  double min_score = 0.25;
  auto add_engine_flags = [&](CLI::App* cmd) {
    cmd->add_option("--keypoint", keypoint, "center|bottom")->check(CLI::IsMember({"center", "bottom"}));
    cmd->add_flag("--no-prefilter", no_prefilter, "Pure parity test without the bounding-box gate");
    cmd->add_option("--classes", classes, "Comma-separated class allowlist (empty accepts all)");
    cmd->add_option("--min-score", min_score, "Minimum detection score")->check(CLI::Range(0.0, 1.0));
  };
  auto engine_options = [&] {
    EngineOptions e;
    e.keypoint = parse_keypoint_mode(keypoint);
    e.prefilter = no_prefilter ? Prefilter::Off : Prefilter::On;
    e.class_allowlist = split_classes(classes);
    e.min_score = min_score;
    return e;
  };

  AnalyzeOptions analyze;
  std::string zones_path;
  std::string trace_path;
  std::string out_path;
  auto* analyze_cmd = app.add_subcommand("analyze", "Evaluate a trace against a zone file offline");
  analyze_cmd->add_option("--zones", zones_path, "Zone file (JSON)")->required();
  analyze_cmd->add_option("--trace", trace_path, "Detection trace (JSONL)")->required();
  analyze_cmd->add_option("--out", out_path, "Report output (JSONL)")->required();
  add_engine_flags(analyze_cmd);

  ServeOptions serve;
  std::string serve_zones;
  std::string serve_out;
  std::string static_dir;
  std::string source_size = "640x480";
  auto* serve_cmd = app.add_subcommand("serve", "Run the live session server");
  serve_cmd->add_option("--port", serve.port, "Listen port")->default_val(8800);
  serve_cmd->add_option("--address", serve.address, "Listen address")->default_val("0.0.0.0");
  serve_cmd->add_option("--source", serve.source, "trace:PATH | adapter:HOST:PORT | synth:CONFIG")->required();
  serve_cmd->add_option("--zones", serve_zones, "Zone file to preload");
  serve_cmd->add_option("--out", serve_out, "Also write report lines to this file");
  serve_cmd->add_option("--static", static_dir, "Directory of UI assets served over HTTP");
  serve_cmd->add_option("--speed", serve.speed, "Replay speed multiplier (0 = unthrottled)")->default_val(1.0);
  serve_cmd->add_option("--source-size", source_size, "Adapter frame size WxH")->default_val("640x480");
  serve_cmd->add_flag("--exit-on-end", serve.exit_on_end, "Stop when a trace or synth source is exhausted");
  add_engine_flags(serve_cmd);

  std::string sim_config;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic detection trace");
  sim_cmd->add_option("--config", sim_config, "Synth config (JSON)")->required();
  sim_cmd->add_option("--out", sim_out, "Trace output (JSONL)")->required();

  BenchOptions bench;
  bool bench_no_prefilter = false;
  auto* bench_cmd = app.add_subcommand("bench", "Measure point-in-zone throughput and frame latency");
  bench_cmd->add_option("--zones", bench.zones, "Zone count")->default_val(16);
  bench_cmd->add_option("--vertices", bench.vertices, "Vertices per zone")->default_val(32);
  bench_cmd->add_option("--points", bench.points, "Query points")->default_val(100000);
  bench_cmd->add_option("--detections", bench.detections, "Detections per frame")->default_val(50);
  bench_cmd->add_flag("--no-prefilter", bench_no_prefilter, "Mark the parity-only mode as selected");
  bench_cmd->add_flag("--outside-only", bench.outside_only, "Sample points outside every zone box");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*analyze_cmd) {
      analyze.zones_path = zones_path;
      analyze.trace_path = trace_path;
      analyze.out_path = out_path;
      analyze.engine = engine_options();
      return cmd_analyze(analyze, std::cerr);
    }
    if (*serve_cmd) {
      if (!serve_zones.empty()) serve.zones_path = serve_zones;
      if (!serve_out.empty()) serve.out_path = serve_out;
      serve.static_dir = static_dir;
      serve.engine = engine_options();
      const auto x = source_size.find('x');
      try {
        if (x == std::string::npos) throw std::invalid_argument(source_size);
        serve.adapter_w = std::stod(source_size.substr(0, x));
        serve.adapter_h = std::stod(source_size.substr(x + 1));
      } catch (const std::exception&) {
        std::cerr << "zonewatch serve: --source-size must be WxH\n";
        return kExitBadInput;
      }
      return cmd_serve(serve, std::cerr);
    }
    if (*sim_cmd) return cmd_simulate(sim_config, sim_out, std::cerr);
    if (*bench_cmd) {
      bench.prefilter = !bench_no_prefilter;
      return cmd_bench(bench, std::cout, std::cerr);
    }
  } catch (const Error& e) {
    std::cerr << "zonewatch: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitFailure;
}

}  // namespace zonewatch::cli
