#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "phasemap/error.hpp"
#include "phasemap/spectral.hpp"
#include "support/oracles.hpp"

using namespace phasemap;

namespace {

// Block kernel: `sizes` groups with within-group similarity `inside` and
// cross similarity `outside`.
Eigen::MatrixXd block_kernel(const std::vector<std::size_t>& sizes, double inside, double outside) {
  const std::size_t d = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  Eigen::MatrixXd k = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d), outside);
  std::size_t start = 0;
  for (std::size_t s : sizes) {
    k.block(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(s),
            static_cast<Eigen::Index>(s))
        .setConstant(inside);
    start += s;
  }
  k.diagonal().setOnes();
  return k;
}

// Whether two labelings define the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

}  // namespace

TEST(Graph, ThresholdIsStrict) {
  Eigen::MatrixXd k(3, 3);
  k << 1.0, 0.5, 0.9, 0.5, 1.0, 0.2, 0.9, 0.2, 1.0;
  const SimilarityGraph g = build_graph(k, 0.5);
  Eigen::MatrixXd expected(3, 3);
  expected << 0, 0, 1, 0, 0, 0, 1, 0, 0;
  EXPECT_EQ(g.adjacency, expected);
  EXPECT_EQ(g.degree, (std::vector<std::size_t>{1, 0, 1}));
  for (double tau : {0.0, 1.0, -0.1, 1.5}) EXPECT_THROW(build_graph(k, tau), ValidationError);
}

TEST(Graph, LaplacianIsAdjacencyMinusDegree) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Constant(3, 3, 0.9);
  const SimilarityGraph g = build_graph(k, 0.5);
  const Eigen::MatrixXd l = laplacian(g);
  Eigen::MatrixXd expected(3, 3);
  expected << -2, 1, 1, 1, -2, 1, 1, 1, -2;
  EXPECT_EQ(l, expected);
  EXPECT_LT(l.rowwise().sum().norm(), 1e-15);
}

TEST(Graph, PathGraphSpectrum) {
  // Path 0-1-2: eigenvalues of A - D are 0, -1, -3.
  Eigen::MatrixXd k(3, 3);
  k << 1.0, 0.8, 0.1, 0.8, 1.0, 0.8, 0.1, 0.8, 1.0;
  const SpectralDecomposition s = decompose(laplacian(build_graph(k, 0.5)));
  ASSERT_EQ(s.eigenvalues.size(), 3);
  EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues(1), -1.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues(2), -3.0, 1e-12);
  // Top eigenvector is constant with a positive first component.
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(s.vectors(i, 0), 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(Graph, LaplacianIsNegativeSemidefinite) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd r = oracle::random_matrix(20, 20, rng).cwiseAbs();
  const Eigen::MatrixXd k = ((r + r.transpose()) / 2).cwiseMin(1.0);
  Eigen::MatrixXd kk = k;
  kk.diagonal().setOnes();
  const SpectralDecomposition s = decompose(laplacian(build_graph(kk, 0.5)));
  EXPECT_LE(s.eigenvalues.maxCoeff(), 1e-10);
  for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) EXPECT_GE(s.eigenvalues(i - 1), s.eigenvalues(i));
  EXPECT_LT((s.vectors.transpose() * s.vectors - Eigen::MatrixXd::Identity(20, 20)).norm(), 1e-10);
}

TEST(Graph, DegenerateBlockBasisIsCanonical) {
  // Two disconnected pairs: the zero eigenvalue is doubly degenerate and its
  // basis comes from projecting e_0 first.
  const Eigen::MatrixXd k = block_kernel({2, 2}, 0.9, 0.1);
  const SpectralDecomposition s = decompose(laplacian(build_graph(k, 0.5)));
  EXPECT_NEAR(s.vectors(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.vectors(1, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.vectors(2, 0), 0.0, 1e-12);
  EXPECT_NEAR(s.vectors(2, 1), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Embedding, ShapeAndRange) {
  const Eigen::MatrixXd k = block_kernel({3, 3}, 0.9, 0.1);
  const Eigen::MatrixXd l = laplacian(build_graph(k, 0.5));
  const SpectralEmbedding e = embed(l, 2);
  EXPECT_EQ(e.delta.rows(), 6);
  EXPECT_EQ(e.delta.cols(), 2);
  EXPECT_EQ(e.eigenvalues.size(), 2u);
  EXPECT_THROW(embed(l, 0), ValidationError);
  EXPECT_THROW(embed(l, 7), ValidationError);
  const SpectralEmbedding n = normalize_rows(e);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(n.delta.row(i).norm(), 1.0, 1e-12);
}

TEST(Embedding, SignConventionMatchesFlippedLaplacian) {
  // Top eigenvectors of A - D are the bottom eigenvectors of D - A.
  const Eigen::MatrixXd k = block_kernel({4, 3, 5}, 0.8, 0.3);
  const Eigen::MatrixXd l = laplacian(build_graph(k, 0.5));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-l);
  const SpectralDecomposition s = decompose(l);
  for (Eigen::Index i = 0; i < 12; ++i) EXPECT_NEAR(s.eigenvalues(i), -es.eigenvalues()(i), 1e-10);
}

TEST(Kmeans, TwoTightPairs) {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 0.1, 5.0, 5.1;
  const ClusterAssignment a = kmeans(x, 2, 0);
  EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_NEAR(a.wcss, 0.01, 1e-12);
  EXPECT_NEAR(wcss(x, a.labels, 2), 0.01, 1e-12);
}

TEST(Kmeans, OneClusterPerPointHasZeroWcss) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = oracle::random_matrix(7, 3, rng);
  const ClusterAssignment a = kmeans(x, 7, 1);
  EXPECT_NEAR(a.wcss, 0.0, 1e-24);
  std::vector<int> sorted = a.labels;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(Kmeans, SingleClusterWcssIsTotalVariance) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = oracle::random_matrix(30, 2, rng);
  const ClusterAssignment a = kmeans(x, 1, 1);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  EXPECT_NEAR(a.wcss, (x.rowwise() - mean).squaredNorm(), 1e-12);
}

TEST(Kmeans, RecoversSeparatedBlobs) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int trial = 0; trial < 5; ++trial) {
    const int c = 2 + trial;
    Eigen::MatrixXd x(c * 10, 2);
    std::vector<int> truth;
    for (int g = 0; g < c; ++g)
      for (int i = 0; i < 10; ++i) {
        x(g * 10 + i, 0) = 3.0 * g + noise(rng);
        x(g * 10 + i, 1) = (g % 2) * 2.0 + noise(rng);
        truth.push_back(g);
      }
    EXPECT_TRUE(same_partition(kmeans(x, static_cast<std::size_t>(c), trial).labels, truth)) << "c=" << c;
  }
}

TEST(Kmeans, PermutingRowsPermutesPartition) {
  std::mt19937_64 rng(7);
  Eigen::MatrixXd x = oracle::random_matrix(24, 2, rng);
  x.topRows(8).array() += 4.0;
  x.bottomRows(8).array() -= 4.0;
  const ClusterAssignment a = kmeans(x, 3, 2);
  std::vector<Eigen::Index> perm(24);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd y(24, 2);
  for (Eigen::Index i = 0; i < 24; ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  const ClusterAssignment b = kmeans(y, 3, 2);
  std::vector<int> pulled(24);
  for (std::size_t i = 0; i < 24; ++i) pulled[static_cast<std::size_t>(perm[i])] = b.labels[i];
  EXPECT_TRUE(same_partition(a.labels, pulled));
  EXPECT_NEAR(a.wcss, b.wcss, 1e-10);
}

TEST(Kmeans, WcssDecreasesWithC) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = oracle::random_matrix(40, 3, rng);
  double previous = 1e300;
  for (std::size_t c = 1; c <= 8; ++c) {
    const double w = kmeans(x, c, 3).wcss;
    EXPECT_LE(w, previous + 1e-12) << "c=" << c;
    previous = w;
  }
}

TEST(Kmeans, DeterministicAndLabelsByFirstAppearance) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd x = oracle::random_matrix(50, 2, rng);
  const ClusterAssignment a = kmeans(x, 4, 11), b = kmeans(x, 4, 11);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.wcss, b.wcss);
  EXPECT_EQ(a.labels[0], 0);
  int seen = 0;
  for (int l : a.labels) {
    EXPECT_LE(l, seen);
    if (l == seen) ++seen;
  }
  EXPECT_EQ(a.restarts_used, 10u);
}

TEST(Kmeans, ArgumentValidation) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 2);
  EXPECT_THROW(kmeans(x, 0, 0), ValidationError);
  EXPECT_THROW(kmeans(x, 4, 0), ValidationError);
  EXPECT_THROW(kmeans(x, 2, 0, 0), ValidationError);
  // Identical points: any split has zero WCSS and must not crash.
  EXPECT_EQ(kmeans(x, 2, 0).wcss, 0.0);
}

TEST(Spectral, BlockKernelSeparatesBlocks) {
  const std::vector<std::size_t> sizes = {5, 7, 4};
  const Eigen::MatrixXd k = block_kernel(sizes, 0.9, 0.2);
  const SpectralEmbedding e = embed(laplacian(build_graph(k, 0.5)), 3);
  const ClusterAssignment a = kmeans(e.delta, 3, 0);
  std::vector<int> truth;
  for (std::size_t b = 0; b < sizes.size(); ++b) truth.insert(truth.end(), sizes[b], static_cast<int>(b));
  EXPECT_TRUE(same_partition(a.labels, truth));
}
