#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zonewatch {

// Base for every error raised by the library. Callers that only care about
// "something was wrong with the input" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyChain : public Error {
 public:
  EmptyChain() : Error("polyline chain has no vertices") {}
};

class StrokeAlreadyOpen : public Error {
 public:
  StrokeAlreadyOpen() : Error("a stroke is already being drawn") {}
};

class NoOpenStroke : public Error {
 public:
  NoOpenStroke() : Error("no stroke is being drawn") {}
};

class InvalidMapping : public Error {
 public:
  using Error::Error;
};

class MappingMismatch : public Error {
 public:
  using Error::Error;
};

class StaleSnapshot : public Error {
 public:
  using Error::Error;
};

class ZoneFileError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed record. `line()` is 1-based; 0 when the record did not come from a file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class OrderError : public Error {
 public:
  OrderError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace zonewatch
