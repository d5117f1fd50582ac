#pragma once

#include <stdexcept>
#include <string>

namespace fracgap {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a documented precondition
/// (invalid stable index, point outside a ball, malformed domain, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Rasterization produced an unusable grid.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Assembly produced a bad weight, a factorization failed, or an
/// eigensolver did not converge. Usually signals a bug or an
/// ill-conditioned configuration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A Monte Carlo path exceeded its step budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace fracgap
