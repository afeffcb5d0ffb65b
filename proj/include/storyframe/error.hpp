#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace storyframe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed input files; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A column or sample with zero variance where a spread is required.
class ZeroVarianceError : public Error {
 public:
  explicit ZeroVarianceError(const std::string& feature)
      : Error("zero variance in feature '" + feature + "'"), feature_(feature) {}

  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

}  // namespace storyframe
