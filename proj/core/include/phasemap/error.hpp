#pragma once

#include <stdexcept>
#include <string>

namespace phasemap {

/// Precondition or input-format violation. The CLI maps it to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mismatched tensor dimensions.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Problem too large for a dense representation.
class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure (non-convergence, breakdown). The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EigenSolverError : public NumericalError {
 public:
  EigenSolverError(const std::string& what, double best_residual)
      : NumericalError(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace phasemap
