#include "zonewatch/trace.hpp"

#include <cmath>

#include "zonewatch/error.hpp"

namespace zonewatch {
namespace {

using nlohmann::json;

double finite_number(const json& v, std::size_t line, const char* what) {
  if (!v.is_number()) throw ParseError(line, std::string(what) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(line, std::string(what) + " must be finite");
  return d;
}

void read_size(const json& source, std::size_t line, double& w, double& h) {
  if (!source.is_object() || !source.contains("width") || !source.contains("height")) {
    throw ParseError(line, "source must be {\"width\":W,\"height\":H}");
  }
  w = finite_number(source["width"], line, "source.width");
  h = finite_number(source["height"], line, "source.height");
  if (w <= 0.0 || h <= 0.0) throw ParseError(line, "source dimensions must be positive");
}

Detection detection_from_json(const json& d, std::size_t line) {
  if (!d.is_object()) throw ParseError(line, "detection must be an object");
  Detection out;
  if (!d.contains("class") || !d["class"].is_string()) throw ParseError(line, "detection.class must be a string");
  out.class_name = d["class"].get<std::string>();

  if (!d.contains("bbox") || !d["bbox"].is_array() || d["bbox"].size() != 4) {
    throw ParseError(line, "detection.bbox must be [x1,y1,x2,y2]");
  }
  const json& b = d["bbox"];
  out.bbox = {finite_number(b[0], line, "bbox"), finite_number(b[1], line, "bbox"),
              finite_number(b[2], line, "bbox"), finite_number(b[3], line, "bbox")};
  if (out.bbox.x1 > out.bbox.x2 || out.bbox.y1 > out.bbox.y2) {
    throw ParseError(line, "detection.bbox must satisfy x1<=x2 and y1<=y2");
  }

  if (d.contains("score")) {
    out.score = finite_number(d["score"], line, "detection.score");
    if (out.score < 0.0 || out.score > 1.0) throw ParseError(line, "detection.score must be in [0,1]");
  }
  if (d.contains("track_id") && !d["track_id"].is_null()) {
    if (!d["track_id"].is_number_integer()) throw ParseError(line, "detection.track_id must be an integer");
    out.track_id = d["track_id"].get<TrackId>();
  }
  return out;
}

}  // namespace

json header_to_json(const TraceHeader& header) {
  json out = {{"type", "header"}, {"source", {{"width", header.source_w}, {"height", header.source_h}}}};
  if (header.fps_hint) out["fps"] = *header.fps_hint;
  if (header.class_vocabulary) out["classes"] = *header.class_vocabulary;
  return out;
}

json frame_to_json(const DetectionFrame& frame) {
  json dets = json::array();
  for (const Detection& d : frame.detections) {
    json rec = {{"class", d.class_name},
                {"bbox", {d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2}},
                {"score", d.score}};
    if (d.track_id) rec["track_id"] = *d.track_id;
    dets.push_back(std::move(rec));
  }
  json out = {{"type", "frame"}, {"frame", frame.frame_index}, {"t_ms", frame.t_ms}, {"detections", std::move(dets)}};
  if (frame.image_b64) out["image_b64"] = *frame.image_b64;
  return out;
}

TraceHeader header_from_json(const json& record, std::size_t line) {
  if (!record.is_object() || record.value("type", "") != "header") {
    throw ParseError(line, "expected a header record");
  }
  TraceHeader out;
  if (!record.contains("source")) throw ParseError(line, "header is missing source");
  read_size(record["source"], line, out.source_w, out.source_h);
  if (record.contains("fps") && !record["fps"].is_null()) {
    out.fps_hint = finite_number(record["fps"], line, "fps");
    if (*out.fps_hint <= 0.0) throw ParseError(line, "fps must be positive");
  }
  if (record.contains("classes") && !record["classes"].is_null()) {
    if (!record["classes"].is_array()) throw ParseError(line, "classes must be an array of strings");
    std::vector<std::string> classes;
    for (const json& c : record["classes"]) {
      if (!c.is_string()) throw ParseError(line, "classes must be an array of strings");
      classes.push_back(c.get<std::string>());
    }
    out.class_vocabulary = std::move(classes);
  }
  return out;
}

DetectionFrame frame_from_json(const json& record, double source_w, double source_h, std::size_t line) {
  if (!record.is_object() || record.value("type", "") != "frame") throw ParseError(line, "expected a frame record");
  DetectionFrame out;
  if (!record.contains("frame") || !record["frame"].is_number_integer()) {
    throw ParseError(line, "frame must be an integer");
  }
  out.frame_index = record["frame"].get<std::int64_t>();
  if (out.frame_index < 0) throw ParseError(line, "frame must be >= 0");
  if (record.contains("t_ms")) {
    if (!record["t_ms"].is_number_integer()) throw ParseError(line, "t_ms must be an integer");
    out.t_ms = record["t_ms"].get<std::int64_t>();
  }
  out.source_w = source_w;
  out.source_h = source_h;
  if (record.contains("source")) read_size(record["source"], line, out.source_w, out.source_h);

  if (!record.contains("detections") || !record["detections"].is_array()) {
    throw ParseError(line, "detections must be an array");
  }
  for (const json& d : record["detections"]) out.detections.push_back(detection_from_json(d, line));

  if (record.contains("image_b64") && !record["image_b64"].is_null()) {
    if (!record["image_b64"].is_string()) throw ParseError(line, "image_b64 must be a string");
    out.image_b64 = record["image_b64"].get<std::string>();
  }
  return out;
}

DetectionFrame parse_frame_line(std::string_view text, double source_w, double source_h, std::size_t line_no) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  return frame_from_json(record, source_w, source_h, line_no);
}

TraceReader::TraceReader(const std::filesystem::path& path) : in_(path) {
  if (!in_) throw IoError("cannot open trace '" + path.string() + "'");
  std::string text;
  if (!next_line(text)) throw ParseError(1, "trace is empty; expected a header record");
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_, std::string("invalid JSON: ") + e.what());
  }
  header_ = header_from_json(record, line_);
}

bool TraceReader::next_line(std::string& out) {
  while (std::getline(in_, out)) {
    ++line_;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    if (out.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

std::optional<DetectionFrame> TraceReader::next() {
  std::string text;
  if (!next_line(text)) return std::nullopt;
  DetectionFrame frame = parse_frame_line(text, header_.source_w, header_.source_h, line_);
  if (last_index_ && frame.frame_index <= *last_index_) {
    throw OrderError(line_, "frame " + std::to_string(frame.frame_index) + " does not follow frame " +
                                std::to_string(*last_index_));
  }
  last_index_ = frame.frame_index;
  return frame;
}

Trace read_trace(const std::filesystem::path& path) {
  TraceReader reader(path);
  Trace out{reader.header(), {}};
  while (auto frame = reader.next()) out.frames.push_back(std::move(*frame));
  return out;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, const TraceHeader& header)
    : path_(path), header_(header), out_(path, std::ios::trunc | std::ios::binary) {
  if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  out_ << header_to_json(header).dump() << '\n';
}

void TraceWriter::write(const DetectionFrame& frame) {
  json record = frame_to_json(frame);
  if (frame.source_w != header_.source_w || frame.source_h != header_.source_h) {
    record["source"] = {{"width", frame.source_w}, {"height", frame.source_h}};
  }
  out_ << record.dump() << '\n';
  if (!out_) throw IoError("write failed for '" + path_.string() + "'");
  ++count_;
}

void TraceWriter::flush() {
  out_.flush();
  if (!out_) throw IoError("flush failed for '" + path_.string() + "'");
}

std::size_t write_trace(const std::filesystem::path& path, const TraceHeader& header,
                        std::span<const DetectionFrame> frames) {
  TraceWriter writer(path, header);
  for (const DetectionFrame& f : frames) writer.write(f);
  writer.flush();
  return writer.count();
}

}  // namespace zonewatch
