#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasemap/dmrg.hpp"
#include "phasemap/kernel.hpp"
#include "phasemap/models.hpp"
#include "phasemap/render.hpp"
#include "phasemap/selection.hpp"

namespace phasemap {

struct RunConfig {
  /// Built-in model name, or a label for `model_text`.
  std::string model = "annni";
  /// Model file contents (see model_from_text); empty for built-in models.
  std::string model_text;
  std::vector<AxisRange> axes;
  /// When set, this many uniformly sampled points replace the grid.
  std::optional<std::size_t> sample_count;
  std::size_t n_sites = 20;
  /// `seed` is ignored here: each point uses derive_seed(seed, index).
  DmrgConfig dmrg;
  double tau = 0.5;
  std::size_t c_min = 2;
  std::size_t c_max = 10;
  /// Skips selection and clusters at this c.
  std::optional<std::size_t> fixed_c;
  std::uint64_t seed = 0;
  SilhouetteMetric metric = SilhouetteMetric::kernel;
  bool normalize_rows = false;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  /// Optional reference-boundary CSV drawn on the heatmap.
  std::string reference_lines;

  // Execution settings; they do not change results and are not digested.
  std::filesystem::path output_dir;
  /// Empty: PHASEMAP_CACHE if set, otherwise no caching.
  std::filesystem::path cache_dir;
  std::size_t jobs = 1;
  /// Progress lines on std::clog.
  bool verbose = false;

  void validate() const;
};

/// JSON form. Missing keys keep their defaults; unknown keys are rejected.
std::string to_text(const RunConfig& config);
RunConfig run_config_from_text(std::string_view text);

/// Hex digest over every result-affecting field.
std::string config_digest(const RunConfig& config);

/// Cache root after applying the PHASEMAP_CACHE fallback; empty if none.
std::filesystem::path resolve_cache_dir(const RunConfig& config);

ParameterizedModel resolve_model(const RunConfig& config);
ParameterGrid resolve_grid(const RunConfig& config);
DmrgConfig point_dmrg_config(const RunConfig& config, std::size_t index);

struct PointReport {
  std::size_t index = 0;
  std::vector<double> coords;
  std::uint64_t seed = 0;
  double energy = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  double max_discarded_weight = 0.0;
  bool cached = false;
  std::string state_key;
};

struct StateSet {
  ParameterGrid grid;
  std::vector<MPS> states;
  std::vector<PointReport> reports;
};

/// Ground states for every grid point, in parallel over points. States are
/// read from and written to <cache>/states/<key>.mps when a cache is set;
/// entries whose stored config differs are recomputed. Non-converged points
/// are kept and flagged.
StateSet compute_states(const RunConfig& config);

/// Kernel of the run, from <cache>/kernels/<key>.csv when present.
KernelMatrix compute_run_kernel(const RunConfig& config, const StateSet& states);

ClusteringOptions clustering_options(const RunConfig& config);
SelectionOptions selection_options(const RunConfig& config);

/// Selection (unless c is fixed), final clustering and per-point silhouettes.
/// Silhouettes are 0 when fewer than two clusters are present.
PhaseDiagram diagram_from_kernel(const KernelMatrix& k, const ParameterGrid& grid, const RunConfig& config);

struct RunResult {
  PhaseDiagram diagram;
  KernelMatrix kernel;
  std::vector<PointReport> points;
};

/// grid -> ground states -> kernel -> selection -> clustering, then the
/// artifacts when an output directory is set.
RunResult run_pipeline(const RunConfig& config);

/// labels.csv: "# config <digest>" line, header "index,<axes...>,label,silhouette".
std::string labels_csv(const PhaseDiagram& diagram);
/// Inverse of labels_csv (the config line is optional).
PhaseDiagram read_labels_csv(std::string_view text);
std::string selection_json(const SelectionCurve& curve, const std::string& digest);

/// Writes labels.csv, kernel.csv (+ kernel.json), selection.json,
/// selection.svg, diagram.svg (2D grids), silhouette.svg and manifest.json.
void write_artifacts(const RunResult& result, const RunConfig& config);

struct CacheEntry {
  std::filesystem::path path;
  std::uintmax_t bytes = 0;
  std::string kind;  ///< "state" or "kernel"
};
std::vector<CacheEntry> list_cache(const std::filesystem::path& root);
/// Removes cached files; returns how many were removed.
std::size_t evict_cache(const std::filesystem::path& root);

}  // namespace phasemap
