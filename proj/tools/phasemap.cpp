// phasemap: ground states, fidelity kernels and phase diagrams from the
// command line. Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phasemap/dmrg.hpp"
#include "phasemap/error.hpp"
#include "phasemap/exact.hpp"
#include "phasemap/kernel.hpp"
#include "phasemap/models.hpp"
#include "phasemap/pipeline.hpp"
#include "phasemap/render.hpp"
#include "phasemap/selection.hpp"
#include "phasemap/util.hpp"

namespace fs = std::filesystem;
using namespace phasemap;

namespace {

constexpr int kValidation = 2;
constexpr int kNumerical = 3;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

// Flags that override a RunConfig. Each setter runs only if its flag was given.
struct RunFlags {
  std::vector<std::function<void(RunConfig&)>> setters;
  std::string config_file;

  template <typename T>
  void add(CLI::App* app, const std::string& name, const std::string& help,
           std::function<void(RunConfig&, const T&)> apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    setters.push_back([opt, value, apply](RunConfig& c) {
      if (opt->count() > 0) apply(c, *value);
    });
  }
  void flag(CLI::App* app, const std::string& name, const std::string& help,
            std::function<void(RunConfig&)> apply) {
    CLI::Option* opt = app->add_flag(name, help);
    setters.push_back([opt, apply](RunConfig& c) {
      if (opt->count() > 0) apply(c);
    });
  }

  RunConfig resolve() const {
    RunConfig c = config_file.empty() ? RunConfig{} : run_config_from_text(slurp(config_file));
    for (const auto& s : setters) s(c);
    return c;
  }
};

void add_model_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config_file, "Run config (JSON); flags override its values");
  f.add<std::string>(app, "--model", "annni or cluster-ising", [](RunConfig& c, const std::string& v) {
    c.model = v;
    c.model_text.clear();
  });
  f.add<std::string>(app, "--model-file", "Hamiltonian model file with parameterized terms",
                     [](RunConfig& c, const std::string& v) {
                       c.model_text = slurp(v);
                       c.model = fs::path(v).stem().string();
                     });
  f.add<std::string>(app, "--grid", "Axis ranges, e.g. k=0:1:15,h=0:2:15",
                     [](RunConfig& c, const std::string& v) { c.axes = parse_grid(v); });
  f.add<std::size_t>(app, "--samples", "Sample this many uniform random points instead of the grid",
                     [](RunConfig& c, const std::size_t& v) { c.sample_count = v; });
  f.add<std::size_t>(app, "--n", "Chain length", [](RunConfig& c, const std::size_t& v) { c.n_sites = v; });
  f.add<std::size_t>(app, "--chi", "MPS bond dimension", [](RunConfig& c, const std::size_t& v) { c.dmrg.chi = v; });
  f.add<std::size_t>(app, "--max-sweeps", "DMRG sweep limit",
                     [](RunConfig& c, const std::size_t& v) { c.dmrg.max_sweeps = v; });
  f.add<double>(app, "--energy-tol", "DMRG convergence tolerance",
                [](RunConfig& c, const double& v) { c.dmrg.energy_tol = v; });
  f.add<double>(app, "--noise", "Initial DMRG noise amplitude (0 disables)",
                [](RunConfig& c, const double& v) { c.dmrg.noise = v; });
  f.add<std::size_t>(app, "--noise-sweeps", "Sweeps with noise",
                     [](RunConfig& c, const std::size_t& v) { c.dmrg.noise_sweeps = v; });
  f.flag(app, "--no-symmetry-projection", "Keep whichever degenerate ground state DMRG returns",
         [](RunConfig& c) { c.dmrg.project_symmetric = false; });
  f.add<std::uint64_t>(app, "--seed", "Global seed", [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
  f.add<std::string>(app, "--cache", "Cache root (default: $PHASEMAP_CACHE)",
                     [](RunConfig& c, const std::string& v) { c.cache_dir = v; });
  f.add<std::size_t>(app, "--jobs", "Worker threads", [](RunConfig& c, const std::size_t& v) { c.jobs = v; });
  f.flag(app, "-v,--verbose", "Progress on stderr", [](RunConfig& c) { c.verbose = true; });
}

void add_cluster_flags(CLI::App* app, RunFlags& f, bool selection) {
  f.add<double>(app, "--tau", "Graph threshold in (0, 1)", [](RunConfig& c, const double& v) { c.tau = v; });
  f.add<std::size_t>(app, "--restarts", "k-means restarts", [](RunConfig& c, const std::size_t& v) { c.restarts = v; });
  f.flag(app, "--normalize-rows", "Normalize embedding rows before k-means",
         [](RunConfig& c) { c.normalize_rows = true; });
  f.add<std::string>(app, "--metric", "Silhouette distances: kernel or embedding",
                     [](RunConfig& c, const std::string& v) {
                       if (v == "kernel") c.metric = SilhouetteMetric::kernel;
                       else if (v == "embedding") c.metric = SilhouetteMetric::embedding;
                       else throw ValidationError("--metric must be kernel or embedding");
                     });
  if (selection) {
    f.add<std::size_t>(app, "--c-min", "Smallest c scanned", [](RunConfig& c, const std::size_t& v) { c.c_min = v; });
    f.add<std::size_t>(app, "--c-max", "Largest c scanned", [](RunConfig& c, const std::size_t& v) { c.c_max = v; });
  }
}

fs::path sidecar(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".json");
}

// Kernel plus the grid recorded in its sidecar manifest, if any.
struct LoadedKernel {
  KernelMatrix kernel;
  ParameterGrid grid;
  std::string digest;
};

LoadedKernel load_kernel(const fs::path& path, const std::string& grid_override) {
  LoadedKernel out;
  const std::string text = slurp(path);
  std::istringstream in(text);
  out.kernel = read_kernel_csv(in);
  out.digest = to_hex(fnv1a64(text));
  std::string grid = grid_override;
  if (fs::exists(sidecar(path))) {
    out.kernel.meta = meta_from_manifest(slurp(sidecar(path)));
    if (grid.empty() && out.kernel.meta.grid.rfind("uniform:", 0) != 0) grid = out.kernel.meta.grid;
  }
  if (!grid.empty()) {
    out.grid = make_grid(parse_grid(grid));
    if (out.grid.size() != out.kernel.size())
      throw ValidationError("grid has " + std::to_string(out.grid.size()) + " points, kernel has " +
                            std::to_string(out.kernel.size()));
  } else {
    // No coordinates known: use the index as a single axis.
    out.grid.axis_names = {"point"};
    for (std::size_t i = 0; i < out.kernel.size(); ++i)
      out.grid.points.push_back({{static_cast<double>(i)}, i});
  }
  return out;
}

int cmd_run(const RunFlags& f) {
  RunConfig c = f.resolve();
  if (c.output_dir.empty()) c.output_dir = "phasemap-out";
  const RunResult r = run_pipeline(c);
  std::size_t bad = 0;
  for (const auto& p : r.points) bad += p.converged ? 0 : 1;
  std::cout << "config " << r.diagram.digest << "\n";
  std::cout << "points " << r.points.size() << " (" << bad << " not converged)\n";
  if (r.diagram.selection) {
    const auto& s = *r.diagram.selection;
    std::cout << "silhouette";
    for (std::size_t i = 0; i < s.c_values.size(); ++i)
      std::cout << " c=" << s.c_values[i] << ":" << format_double(s.silhouette_avgs[i]).substr(0, 6);
    std::cout << "\nelbow c=" << s.elbow.c << (s.elbow.weak ? " (weak)" : "") << "\n";
  }
  std::cout << "chosen c=" << r.diagram.chosen_c << "\nartifacts in " << c.output_dir.string() << "\n";
  return 0;
}

int cmd_kernel(const RunFlags& f, const std::string& out) {
  const RunConfig c = f.resolve();
  const StateSet set = compute_states(c);
  const KernelMatrix k = compute_run_kernel(c, set);
  std::ostringstream buf;
  write_kernel_csv(buf, k);
  spit(out, buf.str());
  auto meta = nlohmann::ordered_json::parse(kernel_manifest(k));
  meta["config_digest"] = config_digest(c);
  spit(sidecar(out), meta.dump(2) + "\n");
  std::cout << "kernel " << k.size() << "x" << k.size() << " -> " << out << "\n";
  return 0;
}

int cmd_cluster(const RunFlags& f, const std::string& kernel_path, const std::string& grid, std::size_t c,
                const std::string& out) {
  RunConfig cfg = f.resolve();
  cfg.fixed_c = c;
  const LoadedKernel lk = load_kernel(kernel_path, grid);
  PhaseDiagram d = diagram_from_kernel(lk.kernel, lk.grid, cfg);
  d.digest = to_hex(fnv1a64(d.digest + lk.digest));
  spit(out, labels_csv(d));
  std::cout << "c=" << c << " labels -> " << out << "\n";
  return 0;
}

int cmd_select(const RunFlags& f, const std::string& kernel_path, const std::string& out, const std::string& svg) {
  RunConfig cfg = f.resolve();
  const LoadedKernel lk = load_kernel(kernel_path, "");
  const SelectionCurve s = select_c(lk.kernel, selection_options(cfg));
  const std::string digest = to_hex(fnv1a64(config_digest(cfg) + lk.digest));
  spit(out, selection_json(s, digest));
  if (!svg.empty()) spit(svg, render_selection_svg(s));
  std::cout << "chosen c=" << s.chosen_c << " elbow c=" << s.elbow.c << (s.elbow.weak ? " (weak)" : "") << "\n";
  return 0;
}

int cmd_diagram(const std::string& labels, const std::string& reference, const std::string& out,
                const std::string& silhouette_out) {
  const PhaseDiagram d = read_labels_csv(slurp(labels));
  std::vector<ReferenceLine> overlay;
  if (!reference.empty()) overlay = read_reference_lines(slurp(reference));
  spit(out, render_heatmap(d, overlay));
  if (!silhouette_out.empty()) {
    SilhouetteReport rep;
    rep.c = d.chosen_c;
    double total = 0.0;
    for (const auto& p : d.points) {
      rep.per_point.push_back({0.0, 0.0, p.silhouette, p.label});
      total += p.silhouette;
    }
    rep.average = d.points.empty() ? 0.0 : total / static_cast<double>(d.points.size());
    spit(silhouette_out, render_silhouette_svg(rep));
  }
  std::cout << d.points.size() << " cells -> " << out << "\n";
  return 0;
}

std::vector<double> parse_point(const std::string& text, const std::vector<std::string>& axes) {
  std::map<std::string, double> values;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("point entry '" + item + "' is not axis=value");
    try {
      values[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("point entry '" + item + "' has a bad number");
    }
  }
  std::vector<double> out;
  for (const auto& a : axes) {
    const auto it = values.find(a);
    if (it == values.end()) throw ValidationError("point is missing axis '" + a + "'");
    out.push_back(it->second);
    values.erase(it);
  }
  if (!values.empty()) throw ValidationError("point names unknown axis '" + values.begin()->first + "'");
  return out;
}

int cmd_oracle(const RunFlags& f, const std::string& point) {
  const RunConfig c = f.resolve();
  const ParameterizedModel model = resolve_model(c);
  const HamiltonianSpec spec = model(parse_point(point, model.axis_names), c.n_sites);
  const DenseSpectrumResult ed = exact_ground_state(spec);
  DmrgConfig dc = c.dmrg;
  dc.seed = c.seed;
  const GroundStateResult gs = ground_state(spec, dc);
  const std::vector<double> v = mps_to_dense(gs.state);
  double ov = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) ov += v[i] * ed.ground_vector[i];
  nlohmann::ordered_json j = {{"model", model.name},
                              {"point", point},
                              {"n_sites", c.n_sites},
                              {"chi", dc.chi},
                              {"dmrg_energy", gs.energy},
                              {"exact_energy", ed.ground_energy},
                              {"relative_error", std::abs(gs.energy - ed.ground_energy) /
                                                     std::max(1.0, std::abs(ed.ground_energy))},
                              {"fidelity", ov * ov},
                              {"gap", ed.gap},
                              {"degenerate", ed.degenerate},
                              {"converged", gs.converged},
                              {"sweeps", gs.sweeps_used}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_cache(const std::string& action, const RunFlags& f) {
  const fs::path root = resolve_cache_dir(f.resolve());
  if (root.empty()) throw ValidationError("no cache directory: pass --cache or set PHASEMAP_CACHE");
  if (action == "list") {
    std::uintmax_t total = 0;
    std::size_t states = 0, kernels = 0;
    for (const auto& e : list_cache(root)) {
      std::cout << e.kind << " " << e.bytes << " " << e.path.string() << "\n";
      total += e.bytes;
      (e.kind == "state" ? states : kernels) += 1;
    }
    std::cout << states << " states, " << kernels << " kernels, " << total << " bytes in " << root.string() << "\n";
  } else {
    std::cout << "removed " << evict_cache(root) << " files from " << root.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised phase diagrams from DMRG fidelity kernels"};
  app.require_subcommand(1);

  RunFlags run_f, kernel_f, cluster_f, select_f, oracle_f, cache_f;

  auto* run = app.add_subcommand("run", "Full pipeline: ground states, kernel, selection, diagram");
  add_model_flags(run, run_f);
  add_cluster_flags(run, run_f, true);
  run_f.add<std::size_t>(run, "--c", "Fixed number of clusters (skips selection)",
                         [](RunConfig& c, const std::size_t& v) { c.fixed_c = v; });
  run_f.add<std::string>(run, "--reference", "Reference boundary CSV (line,x,y) for the heatmap",
                         [](RunConfig& c, const std::string& v) { c.reference_lines = v; });
  run_f.add<std::string>(run, "--out", "Output directory (default phasemap-out)",
                         [](RunConfig& c, const std::string& v) { c.output_dir = v; });

  auto* kernel = app.add_subcommand("kernel", "Compute the fidelity kernel");
  add_model_flags(kernel, kernel_f);
  std::string kernel_out = "kernel.csv";
  kernel->add_option("--out", kernel_out, "Kernel CSV; the manifest goes next to it as .json");

  auto* clus = app.add_subcommand("cluster", "Spectral clustering of a kernel at fixed c");
  std::string clus_kernel, clus_grid, clus_out = "labels.csv";
  std::size_t clus_c = 2;
  clus->add_option("--kernel", clus_kernel, "Kernel CSV")->required();
  clus->add_option("--c", clus_c, "Number of clusters")->required();
  clus->add_option("--grid", clus_grid, "Grid of the kernel rows (default: from the kernel manifest)");
  clus->add_option("--out", clus_out, "Labels CSV");
  add_cluster_flags(clus, cluster_f, false);
  cluster_f.add<std::uint64_t>(clus, "--seed", "k-means seed", [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });

  auto* sel = app.add_subcommand("select-c", "Silhouette and elbow scan over c");
  std::string sel_kernel, sel_out = "selection.json", sel_svg;
  sel->add_option("--kernel", sel_kernel, "Kernel CSV")->required();
  sel->add_option("--out", sel_out, "Selection JSON");
  sel->add_option("--svg", sel_svg, "Also plot both curves");
  add_cluster_flags(sel, select_f, true);
  select_f.add<std::uint64_t>(sel, "--seed", "k-means seed", [](RunConfig& c, const std::uint64_t& v) { c.seed = v; });
  select_f.add<std::size_t>(sel, "--jobs", "Worker threads", [](RunConfig& c, const std::size_t& v) { c.jobs = v; });

  auto* diag = app.add_subcommand("diagram", "Render a labels CSV as a heatmap");
  std::string diag_labels, diag_ref, diag_out = "diagram.svg", diag_sil;
  diag->add_option("--labels", diag_labels, "Labels CSV")->required();
  diag->add_option("--reference", diag_ref, "Reference boundary CSV (line,x,y)");
  diag->add_option("--out", diag_out, "Heatmap SVG");
  diag->add_option("--silhouette", diag_sil, "Also write the silhouette plot here");

  auto* oracle = app.add_subcommand("oracle", "Compare DMRG with exact diagonalization at one point");
  std::string oracle_point;
  oracle->add_option("--point", oracle_point, "Parameters, e.g. k=0.4,h=0.9")->required();
  add_model_flags(oracle, oracle_f);

  auto* cache = app.add_subcommand("cache", "Inspect or clear the state and kernel cache");
  std::string cache_action = "list";
  cache->add_option("action", cache_action, "list or evict")->check(CLI::IsMember({"list", "evict"}));
  cache_f.add<std::string>(cache, "--cache", "Cache root (default: $PHASEMAP_CACHE)",
                           [](RunConfig& c, const std::string& v) { c.cache_dir = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    if (*run) return cmd_run(run_f);
    if (*kernel) return cmd_kernel(kernel_f, kernel_out);
    if (*clus) return cmd_cluster(cluster_f, clus_kernel, clus_grid, clus_c, clus_out);
    if (*sel) return cmd_select(select_f, sel_kernel, sel_out, sel_svg);
    if (*diag) return cmd_diagram(diag_labels, diag_ref, diag_out, diag_sil);
    if (*oracle) return cmd_oracle(oracle_f, oracle_point);
    if (*cache) return cmd_cache(cache_action, cache_f);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
