#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace specmap {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (edge lists, landmark files, configs).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A precondition on arguments (sizes, ranges, membership) was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operand shapes do not agree.
class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Solver failed to converge or a system was singular.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

using WarningSink = std::function<void(const std::string&)>;

inline WarningSink& warning_sink() {
  static WarningSink sink = [](const std::string& msg) { std::cerr << "specmap: warning: " << msg << '\n'; };
  return sink;
}

/// Replaces the warning sink and returns the previous one.
inline WarningSink set_warning_sink(WarningSink sink) {
  return std::exchange(warning_sink(), std::move(sink));
}

inline void warn(const std::string& msg) {
  if (warning_sink()) warning_sink()(msg);
}

}  // namespace specmap
