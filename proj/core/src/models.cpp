#include "phasemap/models.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <sstream>
#include <string>

#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

namespace {

void require_three_sites(std::size_t n_sites, const char* model) {
  if (n_sites < 3)
    throw ValidationError(std::string(model) + " needs N >= 3 (the three-site term must fit), got N=" +
                          std::to_string(n_sites));
}

std::string describe(const char* model, std::initializer_list<std::pair<const char*, double>> params) {
  std::ostringstream os;
  os << model;
  for (const auto& [k, v] : params) os << ' ' << k << '=' << format_double(v);
  return os.str();
}

}  // namespace

HamiltonianSpec annni_spec(double k, double h, std::size_t n_sites) {
  require_three_sites(n_sites, "ANNNI");
  using namespace ops;
  HamiltonianSpec s;
  s.d = 2;
  s.n_sites = n_sites;
  s.description = describe("annni", {{"k", k}, {"h", h}});
  s.terms = {{0, -h, {sigma_z()}},
             {1, -1.0, {sigma_x(), sigma_x()}},
             {2, k, {sigma_x(), identity(), sigma_x()}}};
  s.validate();
  return s;
}

HamiltonianSpec cluster_ising_spec(double h1, double h2, std::size_t n_sites) {
  require_three_sites(n_sites, "Cluster-Ising");
  using namespace ops;
  HamiltonianSpec s;
  s.d = 2;
  s.n_sites = n_sites;
  s.description = describe("cluster-ising", {{"h1", h1}, {"h2", h2}});
  s.terms = {{0, -h1, {sigma_x()}},
             {1, -h2, {sigma_x(), sigma_x()}},
             {2, -1.0, {sigma_z(), sigma_x(), sigma_z()}}};
  s.validate();
  return s;
}

namespace {

void validate_axes(std::span<const AxisRange> axes) {
  if (axes.empty()) throw ValidationError("grid needs at least one axis");
  for (const auto& a : axes) {
    if (a.count == 0) throw ValidationError("axis '" + a.name + "' has zero count");
    if (!(a.min <= a.max))
      throw ValidationError("axis '" + a.name + "' has min > max");
  }
}

std::vector<std::string> names_of(std::span<const AxisRange> axes) {
  std::vector<std::string> names;
  for (const auto& a : axes) names.push_back(a.name);
  return names;
}

double linspace(const AxisRange& a, std::size_t i) {
  if (a.count == 1) return a.min;
  if (i + 1 == a.count) return a.max;
  return a.min + (a.max - a.min) * static_cast<double>(i) / static_cast<double>(a.count - 1);
}

}  // namespace

ParameterGrid make_grid(std::span<const AxisRange> axes) {
  validate_axes(axes);
  ParameterGrid g;
  g.axis_names = names_of(axes);
  g.axis_ranges.assign(axes.begin(), axes.end());

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.count;
  g.points.reserve(total);
  std::vector<std::size_t> counter(axes.size(), 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    ParameterPoint p;
    p.index = idx;
    for (std::size_t k = 0; k < axes.size(); ++k) p.coords.push_back(linspace(axes[k], counter[k]));
    g.points.push_back(std::move(p));
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++counter[k] < axes[k].count) break;
      counter[k] = 0;
    }
  }
  return g;
}

ParameterGrid sample_uniform(std::span<const AxisRange> axes, std::size_t count,
                             std::uint64_t seed) {
  validate_axes(axes);
  if (count == 0) throw ValidationError("sample count must be positive");
  ParameterGrid g;
  g.axis_names = names_of(axes);
  g.axis_ranges.assign(axes.begin(), axes.end());
  Rng rng(seed);
  for (std::size_t idx = 0; idx < count; ++idx) {
    ParameterPoint p;
    p.index = idx;
    for (const auto& a : axes) p.coords.push_back(rng.uniform(a.min, a.max));
    g.points.push_back(std::move(p));
  }
  return g;
}

namespace {

double parse_number(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty())
    throw ValidationError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<AxisRange> parse_grid(std::string_view text) {
  std::vector<AxisRange> axes;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);

    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ValidationError("grid axis '" + std::string(item) + "' must look like name=min:max:count");
    AxisRange a;
    a.name = std::string(item.substr(0, eq));
    std::string_view rest = item.substr(eq + 1);
    const auto c1 = rest.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : rest.find(':', c1 + 1);
    if (c2 == std::string_view::npos)
      throw ValidationError("grid axis '" + std::string(item) + "' must look like name=min:max:count");
    a.min = parse_number(rest.substr(0, c1), "axis minimum");
    a.max = parse_number(rest.substr(c1 + 1, c2 - c1 - 1), "axis maximum");
    const double count = parse_number(rest.substr(c2 + 1), "axis count");
    if (count < 0 || count != std::floor(count))
      throw ValidationError("axis count must be a non-negative integer");
    a.count = static_cast<std::size_t>(count);
    axes.push_back(std::move(a));
  }
  validate_axes(axes);
  return axes;
}

std::string format_grid(std::span<const AxisRange> axes) {
  std::string out;
  for (const auto& a : axes) {
    if (!out.empty()) out += ',';
    out += a.name + '=' + format_double(a.min) + ':' + format_double(a.max) + ':' +
           std::to_string(a.count);
  }
  return out;
}

HamiltonianSpec ParameterizedModel::operator()(std::span<const double> params,
                                               std::size_t n_sites) const {
  if (params.size() != axis_names.size())
    throw ValidationError("model '" + name + "' expects " + std::to_string(axis_names.size()) +
                          " parameters, got " + std::to_string(params.size()));
  return build(params, n_sites);
}

ParameterizedModel builtin_model(std::string_view name) {
  if (name == "annni")
    return {"annni", {"k", "h"}, [](std::span<const double> x, std::size_t n) {
              return annni_spec(x[0], x[1], n);
            }};
  if (name == "cluster-ising")
    return {"cluster-ising", {"h1", "h2"}, [](std::span<const double> x, std::size_t n) {
              return cluster_ising_spec(x[0], x[1], n);
            }};
  throw ValidationError("unknown model '" + std::string(name) +
                        "' (expected annni or cluster-ising)");
}

ParameterizedModel model_from_text(std::string_view text, std::string name) {
  using nlohmann::json;
  HamiltonianSpec base;
  std::vector<std::string> axes;
  std::vector<int> param_of_term;  // axis index or -1
  try {
    const json j = json::parse(text);
    base.d = j.at("d").get<int>();
    base.n_sites = j.value("n_sites", std::size_t{0});
    base.description = j.value("description", name);
    base.merge_prefixes = j.value("merge_prefixes", false);
    if (j.contains("axes")) axes = j.at("axes").get<std::vector<std::string>>();
    for (const auto& jt : j.at("terms")) {
      InteractionTerm term;
      term.p = jt.at("p").get<int>();
      term.coefficient = jt.value("coefficient", 1.0);
      for (const auto& label : jt.at("ops"))
        term.ops.push_back(ops::from_label(label.get<std::string>()));
      int axis = -1;
      if (jt.contains("param")) {
        const auto pname = jt.at("param").get<std::string>();
        for (std::size_t a = 0; a < axes.size(); ++a)
          if (axes[a] == pname) axis = static_cast<int>(a);
        if (axis < 0) throw ValidationError("term parameter '" + pname + "' is not a declared axis");
      }
      param_of_term.push_back(axis);
      base.terms.push_back(std::move(term));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
  if (axes.empty()) throw ValidationError("model file declares no axes");

  {
    HamiltonianSpec probe = base;
    if (probe.n_sites == 0) probe.n_sites = static_cast<std::size_t>(probe.d) + 1;
    probe.validate();
  }

  return {std::move(name), axes,
          [base, param_of_term](std::span<const double> x, std::size_t n_sites) {
            HamiltonianSpec s = base;
            if (n_sites != 0) s.n_sites = n_sites;
            std::ostringstream desc;
            desc << base.description;
            for (std::size_t t = 0; t < s.terms.size(); ++t)
              if (param_of_term[t] >= 0) s.terms[t].coefficient *= x[static_cast<std::size_t>(param_of_term[t])];
            for (double v : x) desc << ' ' << format_double(v);
            s.description = desc.str();
            s.validate();
            return s;
          }};
}

std::vector<AxisRange> default_axes(std::string_view model_name, std::size_t count) {
  if (model_name == "annni") return {{"k", 0.0, 1.0, count}, {"h", 0.0, 2.0, count}};
  if (model_name == "cluster-ising") return {{"h1", 0.0, 1.6, count}, {"h2", -1.6, 1.6, count}};
  throw ValidationError("no default grid for model '" + std::string(model_name) + "'");
}

}  // namespace phasemap
