#include "phasemap/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

using Eigen::Index;
using Eigen::MatrixXd;

SilhouetteReport silhouette(const MatrixXd& dist, std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (dist.rows() != dist.cols() || static_cast<std::size_t>(dist.rows()) != n)
    throw ShapeError("silhouette: distance matrix is " + std::to_string(dist.rows()) + "x" +
                     std::to_string(dist.cols()) + " for " + std::to_string(n) + " labels");
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw ValidationError("silhouette: negative cluster label");
    max_label = std::max(max_label, l);
  }
  const auto c = static_cast<std::size_t>(max_label + 1);
  std::vector<std::size_t> size(c, 0);
  for (int l : labels) ++size[static_cast<std::size_t>(l)];
  const auto present = std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; });
  if (present < 2) throw ValidationError("silhouette requires c >= 2");

  SilhouetteReport r;
  r.c = c;
  r.per_point.resize(n);
  std::vector<double> sums(c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sums[static_cast<std::size_t>(labels[j])] += dist(static_cast<Index>(i), static_cast<Index>(j));
    const auto own = static_cast<std::size_t>(labels[i]);
    SilhouettePoint& p = r.per_point[i];
    p.cluster = labels[i];
    p.b = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c; ++k)
      if (k != own && size[k] > 0) p.b = std::min(p.b, sums[k] / static_cast<double>(size[k]));
    if (size[own] == 1) {
      p.a = 0.0;
      p.s = 0.0;
    } else {
      p.a = sums[own] / static_cast<double>(size[own] - 1);
      const double m = std::max(p.a, p.b);
      p.s = m > 0.0 ? (p.b - p.a) / m : 0.0;
    }
    total += p.s;
  }
  r.average = total / static_cast<double>(n);
  return r;
}

SilhouettePlotData silhouette_plot_data(const SilhouetteReport& report) {
  SilhouettePlotData out;
  out.average = report.average;
  out.bands.resize(report.c);
  for (std::size_t i = 0; i < report.per_point.size(); ++i) {
    const auto& p = report.per_point[i];
    out.bands[static_cast<std::size_t>(p.cluster)].push_back({i, p.s});
  }
  for (auto& band : out.bands)
    std::stable_sort(band.begin(), band.end(),
                     [](const SilhouetteBar& x, const SilhouetteBar& y) { return x.s < y.s; });
  std::erase_if(out.bands, [](const auto& band) { return band.empty(); });
  return out;
}

ElbowResult elbow_detect(std::span<const double> wcss, std::span<const std::size_t> c_values) {
  if (wcss.size() != c_values.size())
    throw ValidationError("elbow: " + std::to_string(wcss.size()) + " WCSS values for " +
                          std::to_string(c_values.size()) + " c values");
  if (wcss.size() < 3) throw ValidationError("elbow detection needs at least 3 points");
  const auto [lo, hi] = std::minmax_element(wcss.begin(), wcss.end());
  const double y_range = *hi - *lo;
  ElbowResult r;
  if (!(y_range >= 1e-12)) {
    r.c = *std::min_element(c_values.begin(), c_values.end());
    r.flat = true;
    r.weak = true;
    return r;
  }
  const double x0 = static_cast<double>(c_values.front());
  const double x_range = static_cast<double>(c_values.back()) - x0;
  if (!(x_range > 0.0)) throw ValidationError("elbow: c values must increase");
  auto x = [&](std::size_t i) { return (static_cast<double>(c_values[i]) - x0) / x_range; };
  auto y = [&](std::size_t i) { return (wcss[i] - *lo) / y_range; };

  // Distance from (x, y) to the line through the end points.
  const double ax = x(0), ay = y(0), bx = x(wcss.size() - 1), by = y(wcss.size() - 1);
  const double len = std::hypot(bx - ax, by - ay);
  r.score = -1.0;
  for (std::size_t i = 1; i + 1 < wcss.size(); ++i) {
    const double dist = std::abs((bx - ax) * (ay - y(i)) - (ax - x(i)) * (by - ay)) / len;
    if (dist > r.score + 1e-12) {
      r.score = dist;
      r.c = c_values[i];
    }
  }
  r.weak = r.score < 1e-6;
  return r;
}

SpectralModel spectral_model(const KernelMatrix& k, double tau) {
  SpectralModel m;
  m.graph = build_graph(k, tau);
  m.decomposition = decompose(laplacian(m.graph));
  return m;
}

Clustering cluster(const SpectralModel& model, std::size_t c, const ClusteringOptions& options) {
  Clustering out;
  out.embedding = embed(model.decomposition, c);
  if (options.normalize_rows) out.embedding = normalize_rows(std::move(out.embedding));
  out.assignment = kmeans(out.embedding.delta, c, options.seed, options.restarts, options.max_iter);
  return out;
}

Clustering cluster(const KernelMatrix& k, std::size_t c, const ClusteringOptions& options) {
  return cluster(spectral_model(k, options.tau), c, options);
}

std::vector<double> wcss_curve(const KernelMatrix& k, std::span<const std::size_t> c_values,
                               const ClusteringOptions& options) {
  const SpectralModel model = spectral_model(k, options.tau);
  std::vector<double> out;
  for (std::size_t c : c_values) {
    if (c < 1 || c > k.size())
      throw ValidationError("c=" + std::to_string(c) + " outside 1.." + std::to_string(k.size()));
    out.push_back(cluster(model, c, options).assignment.wcss);
  }
  return out;
}

namespace {

MatrixXd euclidean_distances(const MatrixXd& rows) {
  const Index n = rows.rows();
  MatrixXd d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = (rows.row(i) - rows.row(j)).norm();
  return d;
}

}  // namespace

SelectionCurve select_c(const KernelMatrix& k, const SelectionOptions& options) {
  if (options.c_min < 2) throw ValidationError("silhouette selection needs c_min >= 2");
  const std::size_t c_max = std::min(options.c_max, k.size());
  if (options.c_min > c_max)
    throw ValidationError("empty c range " + std::to_string(options.c_min) + ".." +
                          std::to_string(options.c_max) + " for D=" + std::to_string(k.size()));

  const SpectralModel model = spectral_model(k, options.clustering.tau);
  const MatrixXd kernel_dist = options.metric == SilhouetteMetric::kernel ? kernel_distance(k) : MatrixXd();

  SelectionCurve curve;
  for (std::size_t c = options.c_min; c <= c_max; ++c) curve.c_values.push_back(c);
  curve.silhouette_avgs.resize(curve.c_values.size());
  curve.wcss.resize(curve.c_values.size());
  parallel_for(curve.c_values.size(), options.jobs, [&](std::size_t i) {
    const Clustering cl = cluster(model, curve.c_values[i], options.clustering);
    curve.wcss[i] = cl.assignment.wcss;
    const auto& labels = cl.assignment.labels;
    curve.silhouette_avgs[i] =
        options.metric == SilhouetteMetric::kernel
            ? silhouette(kernel_dist, labels).average
            : silhouette(euclidean_distances(cl.embedding.delta), labels).average;
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.c_values.size(); ++i)
    if (curve.silhouette_avgs[i] > curve.silhouette_avgs[best]) best = i;
  curve.chosen_c = curve.c_values[best];
  if (curve.c_values.size() >= 3) {
    curve.elbow = elbow_detect(curve.wcss, curve.c_values);
  } else {
    curve.elbow.c = curve.c_values.front();
    curve.elbow.weak = true;
  }
  return curve;
}

}  // namespace phasemap
