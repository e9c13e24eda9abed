#pragma once

#include <stdexcept>
#include <string>

namespace mhdlab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, solver or run configuration (bad sizes, out-of-range values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on inputs that violate its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The solution has leaked out of the window core, so the truncated
/// angular-derivative operator no longer represents the whole-space one.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Loss of numerical validity: NaN, blow-up guard, or failed stability bound.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The advective CFL bound is violated; carries the largest admissible step.
class CflError : public NumericalError {
 public:
  CflError(const std::string& what, double suggested_dt)
      : NumericalError(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

/// File-system or format failure while reading/writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mhdlab
