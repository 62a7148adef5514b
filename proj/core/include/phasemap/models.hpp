#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phasemap/hamiltonian.hpp"

namespace phasemap {

/// ANNNI chain: -sum Sx_j Sx_{j+1} + k sum Sx_j Sx_{j+2} - h sum Sz_j  (J = 1).
HamiltonianSpec annni_spec(double k, double h, std::size_t n_sites);

/// Cluster-Ising chain: -sum Sz_j Sx_{j+1} Sz_{j+2} - h2 sum Sx_j Sx_{j+1} - h1 sum Sx_j.
HamiltonianSpec cluster_ising_spec(double h1, double h2, std::size_t n_sites);

struct ParameterPoint {
  std::vector<double> coords;
  std::size_t index = 0;
};

struct AxisRange {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 1;
};

struct ParameterGrid {
  std::vector<ParameterPoint> points;
  std::vector<std::string> axis_names;
  std::vector<AxisRange> axis_ranges;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t dimension() const noexcept { return axis_names.size(); }
};

/// Cartesian product of inclusive linspaces, last axis varying fastest.
ParameterGrid make_grid(std::span<const AxisRange> axes);

/// `count` points drawn uniformly inside the box spanned by the axis ranges.
/// The per-axis counts are ignored.
ParameterGrid sample_uniform(std::span<const AxisRange> axes, std::size_t count,
                             std::uint64_t seed);

/// Parses "k=0:1:30,h=0:2:30" (axis=min:max:count, comma separated).
std::vector<AxisRange> parse_grid(std::string_view text);
std::string format_grid(std::span<const AxisRange> axes);

/// A Hamiltonian family: maps a parameter vector to a HamiltonianSpec.
struct ParameterizedModel {
  std::string name;
  std::vector<std::string> axis_names;
  std::function<HamiltonianSpec(std::span<const double> params, std::size_t n_sites)> build;

  HamiltonianSpec operator()(std::span<const double> params, std::size_t n_sites) const;
};

/// "annni" (axes k, h) or "cluster-ising" (axes h1, h2).
ParameterizedModel builtin_model(std::string_view name);

/// Model file: a Hamiltonian spec document whose terms may carry a "param"
/// field naming an axis; such a term's coefficient is multiplied by that
/// parameter's value. Axes are listed under "axes".
ParameterizedModel model_from_text(std::string_view text, std::string name = "custom");

/// Default grid ranges for the built-in models.
std::vector<AxisRange> default_axes(std::string_view model_name, std::size_t count);

}  // namespace phasemap
