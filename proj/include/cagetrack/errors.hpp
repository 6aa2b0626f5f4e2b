#pragma once

#include <stdexcept>
#include <string>

namespace cagetrack {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line` is 1-based; 0 when not tied to a file line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Bad configuration entry; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Caller broke an operation's contract (non-monotonic frames, mismatched ranges, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside a kernel (singular innovation, zero vector, degenerate box).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cagetrack
