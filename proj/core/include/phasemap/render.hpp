#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasemap/selection.hpp"

namespace phasemap {

struct DiagramPoint {
  std::vector<double> coords;
  int label = 0;
  double silhouette = 0.0;
};

/// Labelled parameter points, one per grid point in dataset order.
struct PhaseDiagram {
  std::vector<std::string> axis_names;
  std::vector<DiagramPoint> points;
  std::size_t chosen_c = 0;
  /// Empty when c was fixed.
  std::optional<SelectionCurve> selection;
  /// Digest of the configuration that produced the diagram.
  std::string digest;
};

/// Fixed palette, cycled with a hue rotation past its end. "#rrggbb".
std::string label_color(int label);

/// Reference boundary: a polyline in parameter coordinates.
struct ReferenceLine {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// CSV with header "line,x,y"; consecutive rows with the same line name form
/// one polyline. Throws ValidationError on malformed rows.
std::vector<ReferenceLine> read_reference_lines(std::string_view text);

/// One cell per point (first axis horizontal, second vertical, increasing
/// upwards), a legend with one entry per label present, axis labels, and
/// the optional overlay. Throws ValidationError("heatmap requires a 2D grid")
/// unless the diagram has exactly two axes.
std::string render_heatmap(const PhaseDiagram& diagram, const std::vector<ReferenceLine>& overlay = {});

/// Horizontal bars grouped by cluster, dashed line at the average, s = 0 axis
/// in the middle so negative widths extend to the left.
std::string render_silhouette_svg(const SilhouetteReport& report);

/// Average silhouette and WCSS against c, with the chosen c and elbow marked.
std::string render_selection_svg(const SelectionCurve& curve);

}  // namespace phasemap
