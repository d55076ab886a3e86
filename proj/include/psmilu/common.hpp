#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace psmilu {

/// Signed index type used for all row/column/nonzero positions.
using Index = std::int64_t;

inline constexpr Index nil_index = -1;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range indices, empty rows/columns and similar pattern defects.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Exactly singular dense factorization. `level` is 1-based, 0 if unknown.
class SingularError : public Error {
 public:
  explicit SingularError(const std::string& what, int level = 0)
      : Error(level > 0 ? "level " + std::to_string(level) + ": " + what : what),
        level_(level) {}

  int level() const noexcept { return level_; }

 private:
  int level_;
};

}  // namespace psmilu
