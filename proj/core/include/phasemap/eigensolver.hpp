#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace phasemap {

/// y = A x for a symmetric linear map A. `y` is pre-sized and must be overwritten.
using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;  ///< unit Euclidean norm
  double residual = 0.0;       ///< ||A v - value v||
  std::size_t iterations = 0;  ///< number of applications of A
};

struct LanczosOptions {
  /// Krylov subspace size between restarts.
  std::size_t krylov_dim = 32;
  /// Ritz vectors carried over at each (thick) restart.
  std::size_t keep = 4;
};

/// Lowest eigenpair of a symmetric operator by thick-restarted Lanczos with
/// full reorthogonalization.
///
/// Converged when ||A v - lambda v|| <= tol * max(1, |lambda|). `max_iter`
/// bounds the total number of operator applications. Throws ValidationError
/// for a zero start vector and EigenSolverError (with the best residual seen)
/// on non-convergence.
Eigenpair lowest_eigenpair(const LinearMap& apply, std::size_t dim,
                           std::span<const double> v0, double tol,
                           std::size_t max_iter, const LanczosOptions& options = {});

}  // namespace phasemap
