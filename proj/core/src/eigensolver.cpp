#include "phasemap/eigensolver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <string>

#include "phasemap/error.hpp"

namespace phasemap {

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Orthogonalizes r against the first `cols` columns of V (two passes of
// classical Gram-Schmidt). Returns the norm of the result.
double orthogonalize(const MatrixXd& V, Index cols, VectorXd& r) {
  for (int pass = 0; pass < 2; ++pass) {
    const VectorXd h = V.leftCols(cols).transpose() * r;
    r.noalias() -= V.leftCols(cols) * h;
  }
  return r.norm();
}

}  // namespace

Eigenpair lowest_eigenpair(const LinearMap& apply, std::size_t dim,
                           std::span<const double> v0, double tol, std::size_t max_iter,
                           const LanczosOptions& options) {
  if (dim == 0) throw ValidationError("lowest_eigenpair: dimension must be positive");
  if (v0.size() != dim)
    throw ValidationError("lowest_eigenpair: start vector has length " +
                          std::to_string(v0.size()) + ", expected " + std::to_string(dim));
  if (!(tol > 0.0)) throw ValidationError("lowest_eigenpair: tol must be positive");
  if (max_iter == 0) throw ValidationError("lowest_eigenpair: max_iter must be positive");

  VectorXd start = Eigen::Map<const VectorXd>(v0.data(), static_cast<Index>(dim));
  const double start_norm = start.norm();
  if (!(start_norm > 0.0) || !std::isfinite(start_norm))
    throw ValidationError("lowest_eigenpair: start vector must be nonzero and finite");
  start /= start_norm;

  const Index n = static_cast<Index>(dim);
  const Index m = std::min<Index>(n, std::max<Index>(2, static_cast<Index>(options.krylov_dim)));
  const Index keep = std::clamp<Index>(static_cast<Index>(options.keep), 1, std::max<Index>(1, m - 1));

  MatrixXd V(n, m);   // orthonormal basis
  MatrixXd AV(n, m);  // A applied to each basis column
  MatrixXd H = MatrixXd::Zero(m, m);
  V.col(0) = start;
  Index size = 1;   // columns of V in use
  Index filled = 0; // columns of AV computed

  std::size_t iterations = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  Eigenpair best;

  VectorXd y(n), ay(n), r(n);
  while (true) {
    // Expand the basis by one operator application.
    {
      const Index j = filled;
      apply(std::span<const double>(V.col(j).data(), dim),
            std::span<double>(AV.col(j).data(), dim));
      ++iterations;
      const VectorXd h = V.leftCols(size).transpose() * AV.col(j);
      H.col(j).head(size) = h;
      H.row(j).head(size) = h.transpose();
      ++filled;
    }

    // Rayleigh-Ritz on the current subspace.
    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(H.topLeftCorner(filled, filled));
    const double theta = ritz.eigenvalues()(0);
    const VectorXd s = ritz.eigenvectors().col(0);
    y.noalias() = V.leftCols(filled) * s;
    ay.noalias() = AV.leftCols(filled) * s;
    const double ynorm = y.norm();
    y /= ynorm;
    ay /= ynorm;
    r = ay - theta * y;
    const double residual = r.norm();

    if (residual < best_residual) {
      best_residual = residual;
      best.value = theta;
      best.vector.assign(y.data(), y.data() + n);
      best.residual = residual;
    }
    if (residual <= tol * std::max(1.0, std::abs(theta))) {
      best.iterations = iterations;
      return best;
    }
    if (iterations >= max_iter)
      throw EigenSolverError("lowest_eigenpair: no convergence after " +
                                 std::to_string(iterations) +
                                 " iterations (best residual " + sci(best_residual) +
                                 ")",
                             best_residual);

    if (filled == m) {
      // Thick restart: keep the lowest Ritz vectors, then continue from the
      // residual of the lowest one.
      const Index k = std::min(keep, filled);
      const MatrixXd S = ritz.eigenvectors().leftCols(k);
      const MatrixXd newV = V.leftCols(filled) * S;
      const MatrixXd newAV = AV.leftCols(filled) * S;
      V.leftCols(k) = newV;
      AV.leftCols(k) = newAV;
      H.setZero();
      H.topLeftCorner(k, k) = ritz.eigenvalues().head(k).asDiagonal();
      size = filled = k;
      // The next direction is the residual of the lowest Ritz vector.
      const VectorXd r0 = AV.col(0) - ritz.eigenvalues()(0) * V.col(0);
      r = r0;
    } else {
      // Lanczos direction: A v_last, orthogonalized against the basis.
      r = AV.col(filled - 1);
    }

    const double scale = std::max(1.0, r.norm());
    const double rnorm = orthogonalize(V, size, r);
    if (size == n || rnorm <= 1e-13 * scale) {
      // Invariant subspace: the Ritz pair cannot improve further.
      throw EigenSolverError(
          "lowest_eigenpair: Krylov space exhausted before reaching tolerance (residual " +
              sci(best_residual) + ")",
          best_residual);
    }
    V.col(size) = r / rnorm;
    ++size;
  }
}

}  // namespace phasemap
