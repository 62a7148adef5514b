#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phasemap/kernel.hpp"
#include "phasemap/spectral.hpp"

namespace phasemap {

struct SilhouettePoint {
  double a = 0.0;  ///< mean distance to the rest of its own cluster
  double b = 0.0;  ///< smallest mean distance to another cluster
  double s = 0.0;
  int cluster = 0;
};

struct SilhouetteReport {
  std::vector<SilhouettePoint> per_point;
  double average = 0.0;
  std::size_t c = 0;
};

/// Silhouette widths for labels in 0..c-1 over a symmetric distance matrix.
/// Points in singleton clusters get s = 0, as do points with a = b = 0.
/// Throws ValidationError if fewer than two clusters are present.
SilhouetteReport silhouette(const Eigen::MatrixXd& dist, std::span<const int> labels);

struct SilhouetteBar {
  std::size_t index = 0;
  double s = 0.0;
};

/// Bars grouped by cluster in ascending label order, ascending s inside each
/// band (ties by index).
struct SilhouettePlotData {
  std::vector<std::vector<SilhouetteBar>> bands;
  double average = 0.0;
};
SilhouettePlotData silhouette_plot_data(const SilhouetteReport& report);

struct ElbowResult {
  std::size_t c = 0;
  double score = 0.0;  ///< normalized distance of the elbow from the chord
  bool flat = false;   ///< WCSS range below 1e-12; c is the smallest value
  bool weak = false;   ///< score below 1e-6: no real bend
};

/// Chord ("kneedle") rule on the curve normalized to the unit square: the
/// interior c farthest from the line through the first and last points.
/// Ties go to the lowest c. Needs at least 3 points.
ElbowResult elbow_detect(std::span<const double> wcss, std::span<const std::size_t> c_values);

enum class SilhouetteMetric { kernel, embedding };

struct ClusteringOptions {
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  bool normalize_rows = false;
};

struct SelectionOptions {
  ClusteringOptions clustering;
  std::size_t c_min = 2;
  std::size_t c_max = 10;
  SilhouetteMetric metric = SilhouetteMetric::kernel;
  std::size_t jobs = 1;
};

/// Graph, Laplacian and decomposition for one kernel and tau, reused across c.
struct SpectralModel {
  SimilarityGraph graph;
  SpectralDecomposition decomposition;
};
SpectralModel spectral_model(const KernelMatrix& k, double tau);

/// Embedding of dimension c (optionally row-normalized) and k-means on it.
struct Clustering {
  SpectralEmbedding embedding;
  ClusterAssignment assignment;
};
Clustering cluster(const SpectralModel& model, std::size_t c, const ClusteringOptions& options);
Clustering cluster(const KernelMatrix& k, std::size_t c, const ClusteringOptions& options);

/// k-means WCSS for each c, each in its own c-dimensional embedding.
std::vector<double> wcss_curve(const KernelMatrix& k, std::span<const std::size_t> c_values,
                               const ClusteringOptions& options);

struct SelectionCurve {
  std::vector<std::size_t> c_values;
  std::vector<double> silhouette_avgs;
  std::vector<double> wcss;
  std::size_t chosen_c = 0;  ///< silhouette argmax, lowest c on ties
  ElbowResult elbow;
};

/// Scans c_min..c_max (clipped to D). Throws ValidationError if c_min < 2 or
/// the range is empty.
SelectionCurve select_c(const KernelMatrix& k, const SelectionOptions& options);

}  // namespace phasemap
