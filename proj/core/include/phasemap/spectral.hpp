#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "phasemap/kernel.hpp"

namespace phasemap {

/// Thresholded similarity graph: A_ij = 1 iff i != j and K_ij > tau.
struct SimilarityGraph {
  Eigen::MatrixXd adjacency;
  std::vector<std::size_t> degree;
  double tau = 0.5;

  std::size_t size() const noexcept { return degree.size(); }
};

/// Throws ValidationError unless 0 < tau < 1.
SimilarityGraph build_graph(const Eigen::MatrixXd& k, double tau);
SimilarityGraph build_graph(const KernelMatrix& k, double tau);

/// L = A - diag(degree). Negative semidefinite with zero row sums.
Eigen::MatrixXd laplacian(const SimilarityGraph& g);

/// Full eigendecomposition of L with eigenvalues in descending order.
/// Inside each numerically degenerate block (spread < 1e-9) the basis is
/// fixed by projecting e_0, e_1, ... onto the block and orthonormalizing in
/// index order; every vector's first non-negligible component is positive.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
};
SpectralDecomposition decompose(const Eigen::MatrixXd& l);

/// The D x c matrix whose columns are the eigenvectors of the c largest
/// eigenvalues.
struct SpectralEmbedding {
  Eigen::MatrixXd delta;
  std::vector<double> eigenvalues;
};

/// Throws ValidationError unless 1 <= c <= D.
SpectralEmbedding embed(const SpectralDecomposition& s, std::size_t c);
SpectralEmbedding embed(const Eigen::MatrixXd& l, std::size_t c);

/// Scales every nonzero row of delta to unit length.
SpectralEmbedding normalize_rows(SpectralEmbedding e);

struct ClusterAssignment {
  std::vector<int> labels;      ///< in 0..c-1, numbered by first appearance
  Eigen::MatrixXd centroids;    ///< one row per cluster
  double wcss = 0.0;
  std::size_t iterations = 0;   ///< Lloyd iterations of the best restart
  std::size_t restarts_used = 0;
};

/// k-means++ seeding followed by Lloyd iterations, best of `restarts` by
/// WCSS. Distance ties go to the lowest centroid index; a cluster that
/// empties is reseeded with the point farthest from its centroid.
/// Deterministic for a fixed seed. Throws ValidationError unless
/// 1 <= c <= rows and restarts >= 1.
ClusterAssignment kmeans(const Eigen::MatrixXd& rows, std::size_t c, std::uint64_t seed,
                         std::size_t restarts = 10, std::size_t max_iter = 300);

/// Sum of squared distances from each row to its cluster mean.
double wcss(const Eigen::MatrixXd& rows, const std::vector<int>& labels, std::size_t c);

}  // namespace phasemap
