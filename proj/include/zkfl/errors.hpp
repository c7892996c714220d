#pragma once

#include <stdexcept>
#include <string>

namespace zkfl {

// Base for every error raised by the library. Ledger submission never throws;
// it reports rejections as values instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class EmptyDataError : public Error {
 public:
  using Error::Error;
};

class DigestMismatch : public Error {
 public:
  using Error::Error;
};

class MalformedProof : public Error {
 public:
  using Error::Error;
};

class QueueFull : public Error {
 public:
  using Error::Error;
};

class ArtifactMismatch : public Error {
 public:
  using Error::Error;
};

class MissingMetrics : public Error {
 public:
  using Error::Error;
};

}  // namespace zkfl
