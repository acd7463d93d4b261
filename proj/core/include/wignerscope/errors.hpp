#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wignerscope {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: out-of-range parameters, malformed specs, mismatched
/// configuration. The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numeric guard tripped (overflow budget, bracket failure, non-convergence).
/// The CLI maps these to exit code 2.
class NumericGuardError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrderError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Raised when a state cannot be represented within the requested truncation.
class TruncationError : public ValidationError {
 public:
  TruncationError(const std::string& what, double tail_mass, std::size_t dim)
      : ValidationError(what), tail_mass_(tail_mass), dim_(dim) {}
  double tail_mass() const noexcept { return tail_mass_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  double tail_mass_;
  std::size_t dim_;
};

/// The forward model produced an impossible value (negative density).
class ModelError : public NumericGuardError {
 public:
  using NumericGuardError::NumericGuardError;
};

/// Line-integral domain does not cover the support of the integrand.
class CoverageError : public NumericGuardError {
 public:
  using NumericGuardError::NumericGuardError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace wignerscope
