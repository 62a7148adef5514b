#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phasemap/eigensolver.hpp"
#include "phasemap/error.hpp"
#include "support/oracles.hpp"

using namespace phasemap;

namespace {

LinearMap dense_map(const Eigen::MatrixXd& m) {
  return [m](std::span<const double> x, std::span<double> y) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv = m * xv;
  };
}

double residual(const Eigen::MatrixXd& m, const Eigenpair& p) {
  const Eigen::Map<const Eigen::VectorXd> v(p.vector.data(), static_cast<Eigen::Index>(p.vector.size()));
  return (m * v - p.value * v).norm();
}

}  // namespace

TEST(Lanczos, DiagonalOperator) {
  const Eigen::MatrixXd m = Eigen::Vector3d(3.0, -1.0, 2.0).asDiagonal();
  const std::vector<double> v0 = {1.0, 1.0, 1.0};
  const Eigenpair p = lowest_eigenpair(dense_map(m), 3, v0, 1e-12, 100);
  EXPECT_NEAR(p.value, -1.0, 1e-12);
  EXPECT_NEAR(std::abs(p.vector[1]), 1.0, 1e-10);
}

TEST(Lanczos, TwoSpinIsing) {
  const Eigen::MatrixXd m = -oracle::kron(oracle::pauli_x(), oracle::pauli_x());
  const std::vector<double> v0 = {1.0, 0.3, 0.2, 0.1};
  const Eigenpair p = lowest_eigenpair(dense_map(m), 4, v0, 1e-12, 100);
  EXPECT_NEAR(p.value, -1.0, 1e-12);
  EXPECT_LE(residual(m, p), 1e-12);
}

TEST(Lanczos, RandomSymmetricMatchesDense) {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd a = oracle::random_matrix(50, 50, rng);
  const Eigen::MatrixXd m = (a + a.transpose()) / 2;
  std::vector<double> v0(50, 1.0);
  const Eigenpair p = lowest_eigenpair(dense_map(m), 50, v0, 1e-12, 5000);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  EXPECT_NEAR(p.value, es.eigenvalues()(0), 1e-9);
  double norm = 0.0;
  for (double x : p.vector) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_LE(p.residual, 1e-12 * std::max(1.0, std::abs(p.value)));
  EXPECT_LE(residual(m, p), 1e-11 * std::max(1.0, std::abs(p.value)));
}

TEST(Lanczos, NeverAboveStartRayleighQuotient) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd a = oracle::random_matrix(20, 20, rng);
    const Eigen::MatrixXd m = (a + a.transpose()) / 2;
    const Eigen::VectorXd v = oracle::random_matrix(20, 1, rng);
    const double rq = v.dot(m * v) / v.squaredNorm();
    const std::vector<double> v0(v.data(), v.data() + 20);
    EXPECT_LE(lowest_eigenpair(dense_map(m), 20, v0, 1e-10, 2000).value, rq + 1e-12);
  }
}

TEST(Lanczos, ZeroStartVectorRejected) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  const std::vector<double> v0(3, 0.0);
  EXPECT_THROW(lowest_eigenpair(dense_map(m), 3, v0, 1e-10, 100), ValidationError);
}

TEST(Lanczos, NonConvergenceCarriesBestResidual) {
  std::mt19937_64 rng(7);
  Eigen::MatrixXd a = oracle::random_matrix(200, 200, rng);
  const Eigen::MatrixXd m = (a + a.transpose()) / 2;
  const std::vector<double> v0(200, 1.0);
  try {
    lowest_eigenpair(dense_map(m), 200, v0, 1e-14, 5, {4, 2});
    FAIL() << "expected EigenSolverError";
  } catch (const EigenSolverError& e) {
    EXPECT_GT(e.best_residual(), 0.0);
    EXPECT_TRUE(std::isfinite(e.best_residual()));
  }
}

TEST(Lanczos, OneDimensional) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const std::vector<double> v0 = {-2.0};
  const Eigenpair p = lowest_eigenpair(dense_map(m), 1, v0, 1e-12, 10);
  EXPECT_DOUBLE_EQ(p.value, 4.0);
  EXPECT_NEAR(std::abs(p.vector[0]), 1.0, 1e-15);
}
