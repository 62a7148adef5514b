#include "phasemap/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "phasemap/error.hpp"
#include "phasemap/hamiltonian.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json dmrg_json(const DmrgConfig& c) {
  return {{"chi", c.chi},
          {"max_sweeps", c.max_sweeps},
          {"energy_tol", c.energy_tol},
          {"svd_cutoff", c.svd_cutoff},
          {"eig_tol", c.eig_tol},
          {"eig_max_iter", c.eig_max_iter},
          {"noise", c.noise},
          {"noise_sweeps", c.noise_sweeps},
          {"project_symmetric", c.project_symmetric}};
}

const char* metric_name(SilhouetteMetric m) { return m == SilhouetteMetric::kernel ? "kernel" : "embedding"; }

ordered_json result_json(const RunConfig& c) {
  ordered_json j = {{"model", c.model},
                    {"model_text", c.model_text},
                    {"grid", format_grid(c.axes)},
                    {"sample_count", c.sample_count ? ordered_json(*c.sample_count) : ordered_json(nullptr)},
                    {"n_sites", c.n_sites},
                    {"dmrg", dmrg_json(c.dmrg)},
                    {"tau", c.tau},
                    {"c_min", c.c_min},
                    {"c_max", c.c_max},
                    {"fixed_c", c.fixed_c ? ordered_json(*c.fixed_c) : ordered_json(nullptr)},
                    {"seed", c.seed},
                    {"metric", metric_name(c.metric)},
                    {"normalize_rows", c.normalize_rows},
                    {"restarts", c.restarts},
                    {"max_iter", c.max_iter},
                    {"reference_lines", c.reference_lines}};
  return j;
}

template <typename T>
void take(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so concurrent readers never see a partial file.
void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp" + to_hex(fnv1a64(content)).substr(0, 6);
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

// Marks an SVG document with the config digest.
std::string with_digest(std::string svg, const std::string& digest) {
  const auto pos = svg.find('\n', svg.find("<rect"));
  if (pos != std::string::npos && svg.find("<desc>") == std::string::npos)
    svg.insert(pos + 1, "<desc>config " + digest + "</desc>\n");
  return svg;
}

Eigen::MatrixXd row_distances(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd d(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.rows(); ++j) d(i, j) = (x.row(i) - x.row(j)).norm();
  return d;
}

}  // namespace

void RunConfig::validate() const {
  if (n_sites < 3) throw ValidationError("n_sites must be >= 3");
  dmrg.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("tau must lie in (0, 1), got " + format_double(tau));
  if (fixed_c) {
    if (*fixed_c < 1) throw ValidationError("fixed c must be >= 1");
  } else {
    if (c_min < 2) throw ValidationError("c_min must be >= 2");
    if (c_min > c_max) throw ValidationError("c_min exceeds c_max");
  }
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (sample_count && *sample_count < 1) throw ValidationError("sample_count must be >= 1");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
}

std::string to_text(const RunConfig& c) {
  ordered_json j = result_json(c);
  j["output_dir"] = c.output_dir.string();
  j["cache_dir"] = c.cache_dir.string();
  j["jobs"] = c.jobs;
  return j.dump(2) + "\n";
}

RunConfig run_config_from_text(std::string_view text) {
  static const std::vector<std::string> known = {
      "model", "model_text", "grid", "sample_count", "n_sites", "dmrg", "tau", "c_min", "c_max", "fixed_c",
      "seed", "metric", "normalize_rows", "restarts", "max_iter", "reference_lines", "output_dir", "cache_dir",
      "jobs", "verbose"};
  static const std::vector<std::string> known_dmrg = {"chi", "max_sweeps", "energy_tol", "svd_cutoff",
                                                      "eig_tol", "eig_max_iter", "noise", "noise_sweeps",
                                                      "project_symmetric"};
  RunConfig c;
  try {
    const auto j = ordered_json::parse(text);
    if (!j.is_object()) throw ValidationError("run config must be a JSON object");
    for (const auto& [key, _] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ValidationError("unknown run config key '" + key + "'");
    take(j, "model", c.model);
    take(j, "model_text", c.model_text);
    if (j.contains("grid")) {
      const auto g = j.at("grid").get<std::string>();
      c.axes = g.empty() ? std::vector<AxisRange>{} : parse_grid(g);
    }
    if (j.contains("sample_count") && !j.at("sample_count").is_null())
      c.sample_count = j.at("sample_count").get<std::size_t>();
    take(j, "n_sites", c.n_sites);
    if (j.contains("dmrg")) {
      const auto& d = j.at("dmrg");
      for (const auto& [key, _] : d.items())
        if (std::find(known_dmrg.begin(), known_dmrg.end(), key) == known_dmrg.end())
          throw ValidationError("unknown dmrg config key '" + key + "'");
      take(d, "chi", c.dmrg.chi);
      take(d, "max_sweeps", c.dmrg.max_sweeps);
      take(d, "energy_tol", c.dmrg.energy_tol);
      take(d, "svd_cutoff", c.dmrg.svd_cutoff);
      take(d, "eig_tol", c.dmrg.eig_tol);
      take(d, "eig_max_iter", c.dmrg.eig_max_iter);
      take(d, "noise", c.dmrg.noise);
      take(d, "noise_sweeps", c.dmrg.noise_sweeps);
      take(d, "project_symmetric", c.dmrg.project_symmetric);
    }
    take(j, "tau", c.tau);
    take(j, "c_min", c.c_min);
    take(j, "c_max", c.c_max);
    if (j.contains("fixed_c") && !j.at("fixed_c").is_null()) c.fixed_c = j.at("fixed_c").get<std::size_t>();
    take(j, "seed", c.seed);
    if (j.contains("metric")) {
      const auto m = j.at("metric").get<std::string>();
      if (m == "kernel") c.metric = SilhouetteMetric::kernel;
      else if (m == "embedding") c.metric = SilhouetteMetric::embedding;
      else throw ValidationError("metric must be kernel or embedding, got '" + m + "'");
    }
    take(j, "normalize_rows", c.normalize_rows);
    take(j, "restarts", c.restarts);
    take(j, "max_iter", c.max_iter);
    take(j, "reference_lines", c.reference_lines);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
    take(j, "jobs", c.jobs);
    take(j, "verbose", c.verbose);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run config: ") + e.what());
  }
  return c;
}

std::string config_digest(const RunConfig& c) {
  ordered_json j = result_json(c);
  // Hash the overlay contents rather than its path.
  if (!c.reference_lines.empty()) j["reference_lines"] = to_hex(fnv1a64(read_file(c.reference_lines)));
  return to_hex(fnv1a64(j.dump()));
}

fs::path resolve_cache_dir(const RunConfig& c) {
  if (!c.cache_dir.empty()) return c.cache_dir;
  if (const char* env = std::getenv("PHASEMAP_CACHE"); env && *env) return env;
  return {};
}

ParameterizedModel resolve_model(const RunConfig& c) {
  if (!c.model_text.empty()) return model_from_text(c.model_text, c.model);
  return builtin_model(c.model);
}

ParameterGrid resolve_grid(const RunConfig& c) {
  const ParameterizedModel model = resolve_model(c);
  std::vector<AxisRange> axes = c.axes.empty() ? default_axes(model.name, 15) : c.axes;
  if (axes.size() != model.axis_names.size())
    throw ValidationError("model '" + model.name + "' has " + std::to_string(model.axis_names.size()) +
                          " parameters, grid has " + std::to_string(axes.size()));
  for (std::size_t a = 0; a < axes.size(); ++a)
    if (axes[a].name != model.axis_names[a])
      throw ValidationError("grid axis " + std::to_string(a) + " is '" + axes[a].name + "', model expects '" +
                            model.axis_names[a] + "'");
  return c.sample_count ? sample_uniform(axes, *c.sample_count, c.seed) : make_grid(axes);
}

DmrgConfig point_dmrg_config(const RunConfig& c, std::size_t index) {
  DmrgConfig d = c.dmrg;
  d.seed = derive_seed(c.seed, index);
  return d;
}

StateSet compute_states(const RunConfig& config) {
  config.validate();
  const ParameterizedModel model = resolve_model(config);
  StateSet out;
  out.grid = resolve_grid(config);
  const std::size_t n = out.grid.size();
  out.states.resize(n);
  out.reports.resize(n);
  const fs::path cache = resolve_cache_dir(config);
  std::mutex log_mutex;
  std::size_t done = 0;

  parallel_for(n, config.jobs, [&](std::size_t i) {
    const ParameterPoint& p = out.grid.points[i];
    const HamiltonianSpec spec = model(p.coords, config.n_sites);
    const DmrgConfig dc = point_dmrg_config(config, i);
    PointReport& r = out.reports[i];
    r.index = p.index;
    r.coords = p.coords;
    r.seed = dc.seed;
    r.state_key = to_hex(fnv1a64(digest(spec) + dmrg_json(dc).dump() + std::to_string(dc.seed)));

    GroundStateResult gs;
    const fs::path file = cache.empty() ? fs::path() : cache / "states" / (r.state_key + ".mps");
    if (!file.empty() && fs::exists(file)) {
      try {
        std::ifstream in(file, std::ios::binary);
        StoredGroundState st = load_ground_state(in);
        if (same_config(st.config, dc) && st.result.state.n_sites() == config.n_sites) {
          gs = std::move(st.result);
          r.cached = true;
        }
      } catch (const ValidationError&) {
        // Unreadable entry: recompute and overwrite.
      }
    }
    if (!r.cached) {
      try {
        gs = ground_state(spec, dc);
      } catch (const NumericalError& e) {
        throw NumericalError("ground state at point " + std::to_string(i) + ": " + e.what());
      }
      if (!file.empty()) {
        std::ostringstream buf;
        save_ground_state(buf, gs, dc);
        write_file(file, buf.str());
      }
    }
    r.energy = gs.energy;
    r.sweeps = gs.sweeps_used;
    r.converged = gs.converged;
    r.max_discarded_weight = gs.max_discarded_weight;
    out.states[i] = std::move(gs.state);
    if (config.verbose) {
      std::lock_guard lock(log_mutex);
      ++done;
      std::clog << "[" << done << "/" << n << "] point " << i << " E=" << format_double(r.energy)
                << (r.cached ? " (cached)" : "") << (r.converged ? "" : " NOT CONVERGED") << "\n";
    }
  });
  return out;
}

KernelMatrix compute_run_kernel(const RunConfig& config, const StateSet& set) {
  std::string keys;
  for (const auto& r : set.reports) keys += r.state_key;
  const std::string key = to_hex(fnv1a64(keys + "|kernel"));
  KernelMeta meta;
  meta.model = config.model;
  meta.grid = config.sample_count ? "uniform:" + std::to_string(*config.sample_count) : format_grid(set.grid.axis_ranges);
  meta.grid_digest = key;
  meta.n_sites = config.n_sites;
  meta.chi = config.dmrg.chi;
  meta.seed = config.seed;
  meta.energy_tol = config.dmrg.energy_tol;
  meta.eig_tol = config.dmrg.eig_tol;
  meta.svd_cutoff = config.dmrg.svd_cutoff;

  const fs::path cache = resolve_cache_dir(config);
  const fs::path file = cache.empty() ? fs::path() : cache / "kernels" / (key + ".csv");
  if (!file.empty() && fs::exists(file)) {
    try {
      std::istringstream in(read_file(file));
      KernelMatrix k = read_kernel_csv(in);
      if (k.size() == set.states.size()) {
        k.meta = meta;
        return k;
      }
    } catch (const ValidationError&) {
      // Recompute below.
    }
  }
  KernelMatrix k = compute_kernel(set.states, config.jobs);
  k.meta = meta;
  if (!file.empty()) {
    std::ostringstream buf;
    write_kernel_csv(buf, k);
    write_file(file, buf.str());
  }
  return k;
}

ClusteringOptions clustering_options(const RunConfig& c) {
  ClusteringOptions o;
  o.tau = c.tau;
  o.seed = c.seed;
  o.restarts = c.restarts;
  o.max_iter = c.max_iter;
  o.normalize_rows = c.normalize_rows;
  return o;
}

SelectionOptions selection_options(const RunConfig& c) {
  SelectionOptions o;
  o.clustering = clustering_options(c);
  o.c_min = c.c_min;
  o.c_max = c.c_max;
  o.metric = c.metric;
  o.jobs = c.jobs;
  return o;
}

PhaseDiagram diagram_from_kernel(const KernelMatrix& k, const ParameterGrid& grid, const RunConfig& config) {
  if (k.size() != grid.size())
    throw ValidationError("kernel has " + std::to_string(k.size()) + " rows, grid has " +
                          std::to_string(grid.size()) + " points");
  PhaseDiagram d;
  d.axis_names = grid.axis_names;
  d.digest = config_digest(config);
  std::size_t c = 0;
  if (config.fixed_c) {
    c = *config.fixed_c;
    if (c > k.size())
      throw ValidationError("c=" + std::to_string(c) + " exceeds the " + std::to_string(k.size()) + " points");
  } else {
    d.selection = select_c(k, selection_options(config));
    c = d.selection->chosen_c;
  }
  d.chosen_c = c;
  const Clustering cl = cluster(k, c, clustering_options(config));
  const auto& labels = cl.assignment.labels;

  std::vector<double> s(labels.size(), 0.0);
  if (std::set<int>(labels.begin(), labels.end()).size() >= 2) {
    const SilhouetteReport rep = silhouette(
        config.metric == SilhouetteMetric::kernel ? kernel_distance(k) : row_distances(cl.embedding.delta), labels);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = rep.per_point[i].s;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) d.points.push_back({grid.points[i].coords, labels[i], s[i]});
  return d;
}

RunResult run_pipeline(const RunConfig& config) {
  config.validate();
  StateSet set = compute_states(config);
  RunResult r;
  r.kernel = compute_run_kernel(config, set);
  r.diagram = diagram_from_kernel(r.kernel, set.grid, config);
  r.points = std::move(set.reports);
  if (!config.output_dir.empty()) write_artifacts(r, config);
  return r;
}

std::string labels_csv(const PhaseDiagram& d) {
  std::string out = "# config " + d.digest + "\nindex";
  for (const auto& a : d.axis_names) out += "," + a;
  out += ",label,silhouette\n";
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    out += std::to_string(i);
    for (double x : d.points[i].coords) out += "," + format_double(x);
    out += "," + std::to_string(d.points[i].label) + "," + format_double(d.points[i].silhouette) + "\n";
  }
  return out;
}

PhaseDiagram read_labels_csv(std::string_view text) {
  PhaseDiagram d;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::set<int> present;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# config ", 0) == 0) {
      d.digest = line.substr(9);
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    if (!header) {
      if (f.size() < 3 || f.front() != "index" || f.back() != "silhouette" || f[f.size() - 2] != "label")
        throw ValidationError("labels file: expected header index,<axes...>,label,silhouette");
      d.axis_names.assign(f.begin() + 1, f.end() - 2);
      header = true;
      continue;
    }
    if (f.size() != d.axis_names.size() + 3)
      throw ValidationError("labels file line " + std::to_string(line_no) + ": expected " +
                            std::to_string(d.axis_names.size() + 3) + " fields");
    DiagramPoint p;
    try {
      for (std::size_t a = 0; a < d.axis_names.size(); ++a) p.coords.push_back(std::stod(f[1 + a]));
      p.label = std::stoi(f[f.size() - 2]);
      p.silhouette = std::stod(f.back());
    } catch (const std::exception&) {
      throw ValidationError("labels file line " + std::to_string(line_no) + ": bad number");
    }
    if (p.label < 0) throw ValidationError("labels file line " + std::to_string(line_no) + ": negative label");
    present.insert(p.label);
    d.points.push_back(std::move(p));
  }
  if (!header) throw ValidationError("labels file has no header");
  d.chosen_c = present.empty() ? 0 : static_cast<std::size_t>(*present.rbegin() + 1);
  return d;
}

std::string selection_json(const SelectionCurve& curve, const std::string& digest) {
  ordered_json j = {{"config_digest", digest},
                    {"c_values", curve.c_values},
                    {"silhouette", curve.silhouette_avgs},
                    {"wcss", curve.wcss},
                    {"chosen_c", curve.chosen_c},
                    {"elbow_c", curve.elbow.c},
                    {"elbow_score", curve.elbow.score},
                    {"elbow_flat", curve.elbow.flat},
                    {"elbow_weak", curve.elbow.weak}};
  return j.dump(2) + "\n";
}

void write_artifacts(const RunResult& r, const RunConfig& config) {
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  const PhaseDiagram& d = r.diagram;
  std::vector<std::string> artifacts;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    artifacts.push_back(name);
  };

  emit("labels.csv", labels_csv(d));
  {
    std::ostringstream buf;
    write_kernel_csv(buf, r.kernel);
    emit("kernel.csv", buf.str());
    auto meta = ordered_json::parse(kernel_manifest(r.kernel));
    meta["config_digest"] = d.digest;
    emit("kernel.json", meta.dump(2) + "\n");
  }
  if (d.selection) {
    emit("selection.json", selection_json(*d.selection, d.digest));
    emit("selection.svg", with_digest(render_selection_svg(*d.selection), d.digest));
  }
  if (d.axis_names.size() == 2) {
    std::vector<ReferenceLine> overlay;
    if (!config.reference_lines.empty()) overlay = read_reference_lines(read_file(config.reference_lines));
    emit("diagram.svg", render_heatmap(d, overlay));
  }
  std::set<int> present;
  for (const auto& p : d.points) present.insert(p.label);
  if (present.size() >= 2) {
    SilhouetteReport rep;
    rep.c = d.chosen_c;
    double total = 0.0;
    for (const auto& p : d.points) {
      rep.per_point.push_back({0.0, 0.0, p.silhouette, p.label});
      total += p.silhouette;
    }
    rep.average = total / static_cast<double>(d.points.size());
    emit("silhouette.svg", with_digest(render_silhouette_svg(rep), d.digest));
  }

  ordered_json points = ordered_json::array();
  ordered_json unconverged = ordered_json::array();
  for (const auto& p : r.points) {
    points.push_back({{"index", p.index},
                      {"coords", p.coords},
                      {"seed", p.seed},
                      {"energy", p.energy},
                      {"sweeps", p.sweeps},
                      {"converged", p.converged},
                      {"max_discarded_weight", p.max_discarded_weight},
                      {"state_key", p.state_key}});
    if (!p.converged) unconverged.push_back(p.index);
  }
  ordered_json manifest = {{"config_digest", d.digest},
                           {"config", ordered_json::parse(to_text(config))},
                           {"chosen_c", d.chosen_c},
                           {"kernel_key", r.kernel.meta.grid_digest},
                           {"unconverged", unconverged},
                           {"artifacts", artifacts},
                           {"points", points}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<CacheEntry> list_cache(const fs::path& root) {
  std::vector<CacheEntry> out;
  for (const auto& [sub, kind] : {std::pair{"states", "state"}, std::pair{"kernels", "kernel"}}) {
    const fs::path dir = root / sub;
    if (!fs::is_directory(dir)) continue;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file()) out.push_back({e.path(), e.file_size(), kind});
  }
  std::sort(out.begin(), out.end(), [](const CacheEntry& a, const CacheEntry& b) { return a.path < b.path; });
  return out;
}

std::size_t evict_cache(const fs::path& root) {
  std::size_t removed = 0;
  for (const auto& e : list_cache(root)) removed += fs::remove(e.path) ? 1 : 0;
  return removed;
}

}  // namespace phasemap
