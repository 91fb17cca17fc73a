#pragma once

#include <stdexcept>
#include <string>

namespace kslab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (negative density, bad exponent, ...).
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// A coefficient function evaluated outside its admissible range.
class InvalidCoefficient : public Error {
public:
  InvalidCoefficient(const std::string& what, double at)
      : Error(what), at_(at) {}
  double at() const noexcept { return at_; }

private:
  double at_;
};

/// Field and grid do not belong together.
class GridMismatch : public Error {
public:
  using Error::Error;
};

/// The iterative linear solver hit its iteration cap.
class SolverStall : public Error {
public:
  SolverStall(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  double residual_;
  int iterations_;
};

/// A stage produced density below the clamp tolerance. The caller retries with a smaller step.
class PositivityFailure : public Error {
public:
  PositivityFailure(const std::string& what, double min_value)
      : Error(what), min_value_(min_value) {}
  double min_value() const noexcept { return min_value_; }

private:
  double min_value_;
};

/// Time series too short for the requested window.
class WindowTooShort : public Error {
public:
  using Error::Error;
};

/// Configuration could not be parsed or failed validation.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

}  // namespace kslab
