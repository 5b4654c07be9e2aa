#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace infograv {

/// Root of every error the toolkit throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid settings: model order, discount, embedding sizes, experiment config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller passed an argument outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that breaks a semantic rule (ordering, ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Not enough neighbours for a local fit.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace infograv
