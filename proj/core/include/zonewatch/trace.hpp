#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "zonewatch/engine.hpp"

namespace zonewatch {

struct TraceHeader {
  double source_w = 0.0;
  double source_h = 0.0;
  std::optional<double> fps_hint;
  std::optional<std::vector<std::string>> class_vocabulary;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

// Record codecs shared by trace files and the live wire protocol. Keys come
// out sorted and doubles in shortest round-trip form, so encoding is canonical.
nlohmann::json header_to_json(const TraceHeader& header);
nlohmann::json frame_to_json(const DetectionFrame& frame);

// Throw ParseError (with `line`) on schema violations.
TraceHeader header_from_json(const nlohmann::json& record, std::size_t line = 0);
// A frame record may carry "source":{"width","height"}; otherwise the
// caller-supplied size is used.
DetectionFrame frame_from_json(const nlohmann::json& record, double source_w, double source_h, std::size_t line = 0);
// Parses one text line into a frame record.
DetectionFrame parse_frame_line(std::string_view line, double source_w, double source_h, std::size_t line_no = 0);

/// Pull-style JSONL trace reader. The first non-blank line must be the header.
/// Frames are yielded in file order; gaps in frame numbers are allowed but
/// they must strictly increase.
class TraceReader {
 public:
  // Throws IoError if the file cannot be opened, ParseError on a bad header.
  explicit TraceReader(const std::filesystem::path& path);

  const TraceHeader& header() const noexcept { return header_; }
  // Throws ParseError / OrderError. Returns nothing at end of file.
  std::optional<DetectionFrame> next();
  std::size_t line() const noexcept { return line_; }

 private:
  bool next_line(std::string& out);

  std::ifstream in_;
  TraceHeader header_;
  std::size_t line_ = 0;
  std::optional<std::int64_t> last_index_;
};

struct Trace {
  TraceHeader header;
  std::vector<DetectionFrame> frames;
};

Trace read_trace(const std::filesystem::path& path);

class TraceWriter {
 public:
  // Throws IoError if the path cannot be opened for writing.
  TraceWriter(const std::filesystem::path& path, const TraceHeader& header);

  void write(const DetectionFrame& frame);
  std::size_t count() const noexcept { return count_; }
  void flush();

 private:
  std::filesystem::path path_;
  TraceHeader header_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

// Returns the number of frames written.
std::size_t write_trace(const std::filesystem::path& path, const TraceHeader& header,
                        std::span<const DetectionFrame> frames);

}  // namespace zonewatch
