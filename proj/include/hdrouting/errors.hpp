#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hdr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter is outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Not enough data to compute an estimate (short runs, no congested points, ...).
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// A runtime invariant of the simulator was violated. Treated as fatal by the CLI.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace hdr
