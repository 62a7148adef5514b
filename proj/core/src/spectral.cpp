#include "phasemap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

SimilarityGraph build_graph(const MatrixXd& k, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ValidationError("tau must lie in (0, 1), got " + format_double(tau));
  if (k.rows() != k.cols()) throw ShapeError("similarity graph needs a square kernel");
  const Index d = k.rows();
  SimilarityGraph g;
  g.tau = tau;
  g.adjacency = MatrixXd::Zero(d, d);
  g.degree.assign(static_cast<std::size_t>(d), 0);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (i != j && k(i, j) > tau) {
        g.adjacency(i, j) = 1.0;
        ++g.degree[static_cast<std::size_t>(i)];
      }
  return g;
}

SimilarityGraph build_graph(const KernelMatrix& k, double tau) { return build_graph(k.entries, tau); }

MatrixXd laplacian(const SimilarityGraph& g) {
  MatrixXd l = g.adjacency;
  for (std::size_t i = 0; i < g.degree.size(); ++i)
    l(static_cast<Index>(i), static_cast<Index>(i)) -= static_cast<double>(g.degree[i]);
  return l;
}

namespace {

constexpr double kDegenerateSpread = 1e-9;
constexpr double kAcceptResidual = 1e-3;
constexpr double kSignThreshold = 1e-10;

void fix_sign(Eigen::Ref<VectorXd> v) {
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > kSignThreshold) {
      if (v(i) < 0.0) v = -v;
      return;
    }
}

// Replaces the columns of `block` by a basis of the same span built from the
// coordinate vectors in index order.
void canonical_basis(Eigen::Ref<MatrixXd> block) {
  const Index d = block.rows(), m = block.cols();
  const MatrixXd q = block;
  MatrixXd out(d, m);
  Index accepted = 0;
  auto orthogonalize = [&](VectorXd& v) {
    for (int pass = 0; pass < 2; ++pass)
      for (Index a = 0; a < accepted; ++a) v -= out.col(a).dot(v) * out.col(a);
    return v.norm();
  };
  for (Index k = 0; k < d && accepted < m; ++k) {
    VectorXd v = q * q.row(k).transpose();
    const double n = orthogonalize(v);
    if (n > kAcceptResidual) out.col(accepted++) = v / n;
  }
  for (Index k = 0; k < m && accepted < m; ++k) {
    VectorXd v = q.col(k);
    const double n = orthogonalize(v);
    if (n > kAcceptResidual) out.col(accepted++) = v / n;
  }
  block = out;
}

}  // namespace

SpectralDecomposition decompose(const MatrixXd& l) {
  if (l.rows() != l.cols() || l.rows() == 0) throw ShapeError("Laplacian must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(l);
  if (solver.info() != Eigen::Success) throw NumericalError("Laplacian eigendecomposition failed");
  const Index d = l.rows();
  SpectralDecomposition s;
  s.eigenvalues = solver.eigenvalues().reverse();
  s.vectors = solver.eigenvectors().rowwise().reverse();

  Index start = 0;
  while (start < d) {
    Index end = start + 1;
    while (end < d && s.eigenvalues(start) - s.eigenvalues(end) < kDegenerateSpread) ++end;
    if (end - start > 1) canonical_basis(s.vectors.middleCols(start, end - start));
    start = end;
  }
  for (Index k = 0; k < d; ++k) fix_sign(s.vectors.col(k));
  return s;
}

SpectralEmbedding embed(const SpectralDecomposition& s, std::size_t c) {
  const auto d = static_cast<std::size_t>(s.eigenvalues.size());
  if (c < 1 || c > d)
    throw ValidationError("embedding dimension c=" + std::to_string(c) + " outside 1.." + std::to_string(d));
  SpectralEmbedding e;
  e.delta = s.vectors.leftCols(static_cast<Index>(c));
  e.eigenvalues.assign(s.eigenvalues.data(), s.eigenvalues.data() + c);
  return e;
}

SpectralEmbedding embed(const MatrixXd& l, std::size_t c) {
  if (c < 1 || c > static_cast<std::size_t>(l.rows()))
    throw ValidationError("embedding dimension c=" + std::to_string(c) + " outside 1.." +
                          std::to_string(l.rows()));
  return embed(decompose(l), c);
}

SpectralEmbedding normalize_rows(SpectralEmbedding e) {
  for (Index i = 0; i < e.delta.rows(); ++i) {
    const double n = e.delta.row(i).norm();
    if (n > 0.0) e.delta.row(i) /= n;
  }
  return e;
}

double wcss(const MatrixXd& rows, const std::vector<int>& labels, std::size_t c) {
  MatrixXd sums = MatrixXd::Zero(static_cast<Index>(c), rows.cols());
  std::vector<double> counts(c, 0.0);
  for (Index i = 0; i < rows.rows(); ++i) {
    const auto l = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    sums.row(static_cast<Index>(l)) += rows.row(i);
    counts[l] += 1.0;
  }
  double total = 0.0;
  for (Index i = 0; i < rows.rows(); ++i) {
    const auto l = static_cast<Index>(labels[static_cast<std::size_t>(i)]);
    total += (rows.row(i) - sums.row(l) / counts[static_cast<std::size_t>(l)]).squaredNorm();
  }
  return total;
}

namespace {

struct Run {
  std::vector<int> labels;
  MatrixXd centroids;
  double wcss = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
};

MatrixXd plus_plus_init(const MatrixXd& x, std::size_t c, Rng& rng) {
  const Index n = x.rows();
  MatrixXd centers(static_cast<Index>(c), x.cols());
  centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::size_t>(n))));
  VectorXd dist2(n);
  for (Index i = 0; i < n; ++i) dist2(i) = (x.row(i) - centers.row(0)).squaredNorm();
  for (Index k = 1; k < static_cast<Index>(c); ++k) {
    const double total = dist2.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = -1;
      for (Index i = 0; i < n; ++i) {
        if (dist2(i) <= 0.0) continue;
        acc += dist2(i);
        pick = i;
        if (acc > target) break;
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::size_t>(n)));
    }
    centers.row(k) = x.row(pick);
    for (Index i = 0; i < n; ++i) dist2(i) = std::min(dist2(i), (x.row(i) - centers.row(k)).squaredNorm());
  }
  return centers;
}

int nearest(const MatrixXd& centers, const Eigen::Ref<const Eigen::RowVectorXd>& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < centers.rows(); ++k) {
    const double d = (p - centers.row(k)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

Run lloyd(const MatrixXd& x, std::size_t c, MatrixXd centers, std::size_t max_iter) {
  const Index n = x.rows();
  Run run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> assign(static_cast<std::size_t>(n));
  for (std::size_t it = 1; it <= max_iter; ++it) {
    run.iterations = it;
    for (Index i = 0; i < n; ++i) assign[static_cast<std::size_t>(i)] = nearest(centers, x.row(i));

    // Repair empty clusters by moving the farthest point of a shared cluster.
    std::vector<std::size_t> count(c, 0);
    for (int l : assign) ++count[static_cast<std::size_t>(l)];
    for (std::size_t k = 0; k < c; ++k) {
      if (count[k] > 0) continue;
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const auto l = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
        if (count[l] < 2) continue;
        const double d = (x.row(i) - centers.row(static_cast<Index>(l))).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --count[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
      assign[static_cast<std::size_t>(far)] = static_cast<int>(k);
      count[k] = 1;
      centers.row(static_cast<Index>(k)) = x.row(far);
    }

    MatrixXd next = MatrixXd::Zero(centers.rows(), centers.cols());
    for (Index i = 0; i < n; ++i) next.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
    for (std::size_t k = 0; k < c; ++k) next.row(static_cast<Index>(k)) /= static_cast<double>(count[k]);
    centers = std::move(next);

    const bool stable = assign == run.labels;
    run.labels = assign;
    if (stable) break;
  }
  run.centroids = std::move(centers);
  run.wcss = wcss(x, run.labels, c);
  return run;
}

}  // namespace

ClusterAssignment kmeans(const MatrixXd& rows, std::size_t c, std::uint64_t seed,
                         std::size_t restarts, std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (c < 1 || c > n)
    throw ValidationError("k-means needs 1 <= c <= " + std::to_string(n) + ", got c=" + std::to_string(c));
  if (restarts < 1) throw ValidationError("k-means needs at least one restart");
  if (max_iter < 1) throw ValidationError("k-means needs max_iter >= 1");

  Run best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    Run run = lloyd(rows, c, plus_plus_init(rows, c, rng), max_iter);
    if (run.wcss < best.wcss) best = std::move(run);
  }

  // Number clusters by first appearance.
  std::vector<int> relabel(c, -1);
  int next = 0;
  for (int l : best.labels)
    if (relabel[static_cast<std::size_t>(l)] < 0) relabel[static_cast<std::size_t>(l)] = next++;
  ClusterAssignment out;
  out.centroids.resize(static_cast<Index>(c), rows.cols());
  for (std::size_t k = 0; k < c; ++k) out.centroids.row(relabel[k]) = best.centroids.row(static_cast<Index>(k));
  for (int l : best.labels) out.labels.push_back(relabel[static_cast<std::size_t>(l)]);
  out.wcss = best.wcss;
  out.iterations = best.iterations;
  out.restarts_used = restarts;
  return out;
}

}  // namespace phasemap
