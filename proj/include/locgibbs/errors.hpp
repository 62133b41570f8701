#pragma once

#include <stdexcept>
#include <string>

namespace locgibbs {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File or parse problems on user-supplied inputs.
struct IoError : Error {
  using Error::Error;
};

/// Inputs that violate a documented precondition or invariant.
struct ValidationError : Error {
  using Error::Error;
};

/// Numerical/model failures: degenerate Monte Carlo estimates, rejection
/// caps, non-positive-definite Hessians, failed optimisations.
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace locgibbs
