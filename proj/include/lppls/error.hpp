#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lppls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A value outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at t == tc, where ln|tc - t| is undefined.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Data that cannot support the requested computation (empty window, duplicates, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Normal matrix or information matrix too ill-conditioned to solve.
class DegenerateDesignError : public Error {
 public:
  DegenerateDesignError(const std::string& what, double condition)
      : Error(what + " (condition number " + std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lppls
