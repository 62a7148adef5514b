#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "phasemap/error.hpp"
#include "phasemap/render.hpp"

using namespace phasemap;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::set<std::string> fills_of(const std::string& svg, const std::string& cls) {
  std::set<std::string> out;
  const std::regex re("<rect class=\"" + cls + "\"[^>]*fill=\"(#[0-9a-f]{6})\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
    out.insert((*it)[1]);
  return out;
}

PhaseDiagram two_by_two() {
  PhaseDiagram d;
  d.axis_names = {"k", "h"};
  d.points = {{{0.0, 0.0}, 0, 0.5}, {{0.0, 1.0}, 0, 0.5}, {{1.0, 0.0}, 1, 0.5}, {{1.0, 1.0}, 1, 0.5}};
  d.chosen_c = 2;
  d.digest = "0123456789abcdef";
  return d;
}

}  // namespace

TEST(Render, HeatmapCellsAndLegend) {
  const std::string svg = render_heatmap(two_by_two());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "<rect class=\"cell\""), 4u);
  EXPECT_EQ(fills_of(svg, "cell").size(), 2u);
  EXPECT_EQ(count(svg, "class=\"legend-item\""), 2u);
  EXPECT_NE(svg.find("0123456789abcdef"), std::string::npos);
  EXPECT_NE(svg.find(">k<"), std::string::npos);
  EXPECT_NE(svg.find(">h<"), std::string::npos);
}

TEST(Render, SingleLabelLegend) {
  PhaseDiagram d = two_by_two();
  for (auto& p : d.points) p.label = 0;
  const std::string svg = render_heatmap(d);
  EXPECT_EQ(count(svg, "class=\"legend-item\""), 1u);
  EXPECT_EQ(fills_of(svg, "cell").size(), 1u);
}

TEST(Render, HeatmapNeedsTwoAxes) {
  PhaseDiagram d = two_by_two();
  d.axis_names = {"k"};
  try {
    render_heatmap(d);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "heatmap requires a 2D grid");
  }
  d.axis_names = {"a", "b", "c"};
  EXPECT_THROW(render_heatmap(d), ValidationError);
}

TEST(Render, OverlayLines) {
  const auto lines = read_reference_lines("line,x,y\n# comment\nkt,0.5,0\nkt,0.6,1\nother,0,0\nother,1,1\n");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].name, "kt");
  EXPECT_EQ(lines[0].points.size(), 2u);
  EXPECT_EQ(lines[1].points[1], (std::pair<double, double>{1.0, 1.0}));
  const std::string svg = render_heatmap(two_by_two(), lines);
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_THROW(read_reference_lines("a,b\n"), ValidationError);
  EXPECT_THROW(read_reference_lines("kt,x,1\n"), ValidationError);
}

TEST(Render, PaletteIsDistinct) {
  std::set<std::string> colors;
  for (int l = 0; l < 20; ++l) {
    const std::string c = label_color(l);
    EXPECT_TRUE(std::regex_match(c, std::regex("#[0-9a-f]{6}"))) << c;
    colors.insert(c);
  }
  EXPECT_EQ(colors.size(), 20u);
}

TEST(Render, SilhouetteBars) {
  SilhouetteReport r;
  r.c = 2;
  r.per_point = {{1.0, 10.0, 0.9, 0}, {1.0, 9.0, 8.0 / 9.0, 0}, {0.0, 0.0, 0.0, 1}};
  r.average = (0.9 + 8.0 / 9.0) / 3.0;
  const std::string svg = render_silhouette_svg(r);
  EXPECT_EQ(count(svg, "<rect class=\"bar\""), 3u);
  EXPECT_EQ(fills_of(svg, "bar").size(), 2u);
  EXPECT_NE(svg.find("data-average=\"0.5963\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

TEST(Render, NegativeSilhouetteBars) {
  SilhouetteReport r;
  r.c = 2;
  r.per_point = {{2.0, 1.0, -0.5, 0}, {1.0, 2.0, 0.5, 0}, {2.0, 1.0, -0.5, 1}, {1.0, 4.0, 0.75, 1}};
  r.average = 0.0625;
  const std::string svg = render_silhouette_svg(r);
  EXPECT_EQ(count(svg, "<rect class=\"bar\""), 4u);
  EXPECT_EQ(count(svg, "data-s=\"-"), 2u);
}

TEST(Render, SelectionPlot) {
  SelectionCurve c;
  c.c_values = {2, 3, 4};
  c.silhouette_avgs = {0.4, 0.7, 0.5};
  c.wcss = {3.0, 1.0, 0.8};
  c.chosen_c = 3;
  c.elbow = {3, 0.5, false, false};
  const std::string svg = render_selection_svg(c);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_GE(count(svg, "<polyline"), 2u);
}
