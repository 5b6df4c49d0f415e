#pragma once

#include <stdexcept>
#include <string>

namespace blfix {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix expected to be positive definite failed its Cholesky factorization.
class CholeskyFailure : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A datum or matrix has inconsistent shapes (wrong row/column counts, weight count != m).
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidShape : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration guard exceeded.
class TooLarge : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// The datum failed one of the hard validation checks (rank, weight range, scaling).
class ValidationFailed : public Error {
 public:
  using Error::Error;
};

/// Backtracking line search could not find an acceptable step.
class StepFailure : public Error {
 public:
  using Error::Error;
};

/// Numeric failure inside a solver run, tagged with the iteration at which it happened.
class IterationFailure : public Error {
 public:
  IterationFailure(int iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace blfix
