#include "phasemap/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "phasemap/error.hpp"

namespace phasemap {

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string hsl_to_hex(double h, double s, double l) {
  auto f = [&](double n) {
    const double k = std::fmod(n + h / 30.0, 12.0);
    const double a = s * std::min(l, 1.0 - l);
    return l - a * std::max(-1.0, std::min({k - 3.0, 9.0 - k, 1.0}));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(255 * f(0))),
                static_cast<int>(std::lround(255 * f(8))), static_cast<int>(std::lround(255 * f(4))));
  return buf;
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, std::string_view s, std::string_view extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + (extra.empty() ? "" : " ") + std::string(extra) +
         ">" + escape(s) + "</text>\n";
}

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

std::string label_color(int label) {
  if (label < 0) throw ValidationError("negative cluster label");
  if (static_cast<std::size_t>(label) < kPalette.size()) return kPalette[static_cast<std::size_t>(label)];
  // Golden-angle hue steps keep later labels distinct from each other.
  const double hue = std::fmod(137.508 * label, 360.0);
  return hsl_to_hex(hue, 0.55, label % 2 ? 0.45 : 0.65);
}

std::vector<ReferenceLine> read_reference_lines(std::string_view input) {
  std::vector<ReferenceLine> lines;
  std::istringstream in{std::string(input)};
  std::string row;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, row)) {
    ++line_no;
    row = trim(row);
    if (row.empty() || row[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      if (row.rfind("line", 0) == 0) continue;
    }
    std::vector<std::string> fields;
    std::istringstream rs(row);
    for (std::string f; std::getline(rs, f, ',');) fields.push_back(trim(f));
    if (fields.size() != 3)
      throw ValidationError("reference line " + std::to_string(line_no) + ": expected line,x,y");
    double x = 0.0, y = 0.0;
    try {
      std::size_t px = 0, py = 0;
      x = std::stod(fields[1], &px);
      y = std::stod(fields[2], &py);
      if (px != fields[1].size() || py != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("reference line " + std::to_string(line_no) + ": bad number");
    }
    if (lines.empty() || lines.back().name != fields[0]) lines.push_back({fields[0], {}});
    lines.back().points.emplace_back(x, y);
  }
  return lines;
}

std::string render_heatmap(const PhaseDiagram& d, const std::vector<ReferenceLine>& overlay) {
  if (d.axis_names.size() != 2) throw ValidationError("heatmap requires a 2D grid");
  for (const auto& p : d.points)
    if (p.coords.size() != 2) throw ValidationError("heatmap requires a 2D grid");

  std::vector<double> xs, ys;
  for (const auto& p : d.points) {
    xs.push_back(p.coords[0]);
    ys.push_back(p.coords[1]);
  }
  xs = unique_sorted(xs);
  ys = unique_sorted(ys);
  const double plot = 450.0, left = 70.0, top = 30.0;
  const double cw = xs.empty() ? plot : plot / static_cast<double>(xs.size());
  const double ch = ys.empty() ? plot : plot / static_cast<double>(ys.size());
  const double x0 = xs.empty() ? 0.0 : xs.front(), x1 = xs.empty() ? 1.0 : xs.back();
  const double y0 = ys.empty() ? 0.0 : ys.front(), y1 = ys.empty() ? 1.0 : ys.back();
  // Cell centres map linearly; a single value sits in the middle.
  auto px = [&](double x) { return left + cw / 2 + (x1 > x0 ? (x - x0) / (x1 - x0) * (plot - cw) : (plot - cw) / 2); };
  auto py = [&](double y) { return top + plot - ch / 2 - (y1 > y0 ? (y - y0) / (y1 - y0) * (plot - ch) : (plot - ch) / 2); };

  std::set<int> labels;
  for (const auto& p : d.points) labels.insert(p.label);

  std::string svg = header(left + plot + 140.0, top + plot + 60.0);
  if (!d.digest.empty()) svg += "<desc>config " + escape(d.digest) + "</desc>\n";
  svg += "<g class=\"cells\" shape-rendering=\"crispEdges\">\n";
  for (const auto& p : d.points)
    svg += "<rect class=\"cell\" x=\"" + num(px(p.coords[0]) - cw / 2) + "\" y=\"" + num(py(p.coords[1]) - ch / 2) +
           "\" width=\"" + num(cw) + "\" height=\"" + num(ch) + "\" fill=\"" + label_color(p.label) +
           "\" data-label=\"" + std::to_string(p.label) + "\"/>\n";
  svg += "</g>\n";

  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot) + "\" height=\"" + num(plot) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& [v, anchor] : {std::pair{x0, "start"}, std::pair{x1, "end"}})
    svg += text(v == x0 ? left : left + plot, top + plot + 16, num(v), std::string("text-anchor=\"") + anchor + "\"");
  svg += text(left - 6, top + plot, num(y0), "text-anchor=\"end\"");
  svg += text(left - 6, top + 10, num(y1), "text-anchor=\"end\"");
  svg += text(left + plot / 2, top + plot + 40, d.axis_names[0], "class=\"axis-label\" text-anchor=\"middle\"");
  svg += text(left - 40, top + plot / 2, d.axis_names[1],
              "class=\"axis-label\" text-anchor=\"middle\" transform=\"rotate(-90 " + num(left - 40) + " " +
                  num(top + plot / 2) + ")\"");

  if (!overlay.empty()) {
    svg += "<g class=\"overlay\" fill=\"none\" stroke=\"black\" stroke-width=\"2\">\n";
    for (const auto& line : overlay) {
      svg += "<polyline data-name=\"" + escape(line.name) + "\" points=\"";
      for (std::size_t i = 0; i < line.points.size(); ++i)
        svg += (i ? " " : "") + num(px(line.points[i].first)) + "," + num(py(line.points[i].second));
      svg += "\"/>\n";
    }
    svg += "</g>\n";
  }

  svg += "<g class=\"legend\">\n";
  double ly = top + 10;
  for (int l : labels) {
    svg += "<g class=\"legend-item\"><rect x=\"" + num(left + plot + 20) + "\" y=\"" + num(ly - 10) +
           "\" width=\"12\" height=\"12\" fill=\"" + label_color(l) + "\"/>" +
           text(left + plot + 38, ly, "cluster " + std::to_string(l)) + "</g>\n";
    ly += 18;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string render_silhouette_svg(const SilhouetteReport& report) {
  const SilhouettePlotData data = silhouette_plot_data(report);
  const double bar = 4.0, gap = 10.0, left = 60.0, top = 30.0, half = 200.0;
  std::size_t bars = 0;
  for (const auto& band : data.bands) bars += band.size();
  const double height = static_cast<double>(bars) * bar + gap * static_cast<double>(data.bands.size());
  const double axis = left + half;
  auto sx = [&](double s) { return axis + s * half; };

  std::string svg = header(left + 2 * half + 40, top + height + 50);
  svg += "<g class=\"bars\">\n";
  double y = top;
  for (const auto& band : data.bands) {
    const int cluster = report.per_point[band.front().index].cluster;
    svg += text(left - 6, y + static_cast<double>(band.size()) * bar / 2 + 4, std::to_string(cluster),
                "text-anchor=\"end\"");
    for (const auto& b : band) {
      const double x = std::min(sx(0.0), sx(b.s));
      svg += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(std::abs(b.s) * half) + "\" height=\"" + num(bar) + "\" fill=\"" + label_color(cluster) +
             "\" data-index=\"" + std::to_string(b.index) + "\" data-s=\"" + num(b.s) + "\"/>\n";
      y += bar;
    }
    y += gap;
  }
  svg += "</g>\n";
  svg += "<line class=\"axis\" x1=\"" + num(axis) + "\" y1=\"" + num(top) + "\" x2=\"" + num(axis) + "\" y2=\"" +
         num(top + height) + "\" stroke=\"black\"/>\n";
  char avg[32];
  std::snprintf(avg, sizeof avg, "%.4f", data.average);
  svg += "<line class=\"average\" data-average=\"" + std::string(avg) + "\" x1=\"" + num(sx(data.average)) +
         "\" y1=\"" + num(top) + "\" x2=\"" + num(sx(data.average)) + "\" y2=\"" + num(top + height) +
         "\" stroke=\"red\" stroke-dasharray=\"5,4\"/>\n";
  for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0})
    svg += text(sx(t), top + height + 16, num(t), "text-anchor=\"middle\"");
  svg += text(axis, top + height + 36, "silhouette width", "text-anchor=\"middle\"");
  svg += "</svg>\n";
  return svg;
}

std::string render_selection_svg(const SelectionCurve& curve) {
  if (curve.c_values.empty()) throw ValidationError("selection plot needs at least one c value");
  const double w = 300.0, h = 200.0, left = 60.0, top = 30.0, gap = 80.0;
  const double c0 = static_cast<double>(curve.c_values.front());
  const double c1 = static_cast<double>(curve.c_values.back());
  auto sx = [&](double panel, double c) { return panel + (c1 > c0 ? (c - c0) / (c1 - c0) * w : w / 2); };

  std::string svg = header(2 * w + gap + 2 * left, h + top + 60);
  auto panel = [&](double x, const std::vector<double>& ys, const std::string& name, std::size_t mark,
                   const char* cls) {
    auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    const double y_lo = *lo, y_hi = *hi > *lo ? *hi : *lo + 1.0;
    auto sy = [&](double v) { return top + h - (v - y_lo) / (y_hi - y_lo) * h; };
    std::string g = "<g class=\"" + std::string(cls) + "\">\n<rect x=\"" + num(x) + "\" y=\"" + num(top) +
                    "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"none\" stroke=\"black\"/>\n";
    g += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i)
      g += (i ? " " : "") + num(sx(x, static_cast<double>(curve.c_values[i]))) + "," + num(sy(ys[i]));
    g += "\"/>\n";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const bool marked = curve.c_values[i] == mark;
      g += "<circle cx=\"" + num(sx(x, static_cast<double>(curve.c_values[i]))) + "\" cy=\"" + num(sy(ys[i])) +
           "\" r=\"" + (marked ? "6" : "3") + "\" fill=\"" + (marked ? "#d62728" : "#1f77b4") + "\"/>\n";
      g += text(sx(x, static_cast<double>(curve.c_values[i])), top + h + 16, std::to_string(curve.c_values[i]),
                "text-anchor=\"middle\"");
    }
    g += text(x + w / 2, top - 10, name, "text-anchor=\"middle\"");
    g += text(x + w / 2, top + h + 36, "c", "text-anchor=\"middle\"");
    return g + "</g>\n";
  };
  svg += panel(left, curve.silhouette_avgs, "average silhouette", curve.chosen_c, "silhouette");
  svg += panel(left + w + gap, curve.wcss, "WCSS", curve.elbow.c, "wcss");
  svg += "</svg>\n";
  return svg;
}

}  // namespace phasemap
