#pragma once

#include <stdexcept>
#include <string>

namespace fgam {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or dimensions that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A NaN or infinity escaped a computation.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied input violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A categorical value outside the fitted vocabulary when unknown levels are not accepted.
class UnknownLevelError : public Error {
 public:
  UnknownLevelError(const std::string& feature, const std::string& level)
      : Error("unknown level '" + level + "' for categorical feature '" + feature + "'"), feature_(feature) {}

  const std::string& feature() const { return feature_; }

 private:
  std::string feature_;
};

// Malformed file content. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : Error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    std::string out = what;
    if (row > 0) out += " (row " + std::to_string(row);
    if (row > 0 && column > 0) out += ", column " + std::to_string(column);
    if (row > 0) out += ")";
    return out;
  }

  std::size_t row_;
  std::size_t column_;
};

}  // namespace fgam
