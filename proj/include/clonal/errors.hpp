#pragma once

#include <stdexcept>
#include <string>

namespace clonal {

// Base of every error raised by the library. Callers that only care about
// "something went wrong numerically or in the input" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Vector length does not match the grid.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Invalid or unresolvable configuration (file, preset, CLI flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Grid too coarse for the requested mollifier width.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCaseError : public Error {
 public:
  using Error::Error;
};

// Fraction requested of a zero-mass density.
class UndefinedFractionError : public Error {
 public:
  using Error::Error;
};

// Two runs from identical data disagree.
class DeterminismError : public Error {
 public:
  using Error::Error;
};

// Base of errors raised while stepping an ODE; carries the last time at
// which the state was known to be valid.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

// NaN or Inf appeared in the state.
class BlowupError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

// A component undershot zero by more than the clamp tolerance.
class NegativityError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

}  // namespace clonal
