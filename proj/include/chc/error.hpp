#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CHC or model text. Line and column are 1-based; 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

class SortError : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

class OverlapError : public Error {
 public:
  OverlapError(const std::string& pred)
      : Error("predicate '" + pred + "' occurs in both partitions"), pred_(pred) {}
  const std::string& predicate() const noexcept { return pred_; }

 private:
  std::string pred_;
};

}  // namespace chc
