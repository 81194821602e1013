#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stolz {

/// 1-based sequence index.
using Index = std::int64_t;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sequence was evaluated outside its index domain.
class IndexError : public Error {
 public:
  IndexError(const std::string& what, Index index)
      : Error(what), index_(index) {}
  Index index() const noexcept { return index_; }

 private:
  Index index_;
};

/// A pair of indices does not form a valid range (e.g. m > n).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Bad argument value (epsilon out of range, prefix too short, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Arithmetic failure while evaluating an expression or term.
class EvaluationError : public Error {
 public:
  enum class Kind { DivisionByZero, Domain, UnboundParameter };

  EvaluationError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Syntax error in an expression, located by byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset,
             std::vector<std::string> expected = {})
      : Error(what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Malformed line in a data-backed sequence file.
class DataFormatError : public Error {
 public:
  DataFormatError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A term required to be positive was not.
class PositivityError : public Error {
 public:
  PositivityError(const std::string& what, Index index)
      : Error(what), index_(index) {}
  Index index() const noexcept { return index_; }

 private:
  Index index_;
};

/// A recursion schedule left its admissible domain (a_n outside (0,1), b_n < 0).
class ScheduleViolation : public Error {
 public:
  ScheduleViolation(const std::string& what, Index index)
      : Error(what), index_(index) {}
  Index index() const noexcept { return index_; }

 private:
  Index index_;
};

}  // namespace stolz
