#include "phasemap/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <string>

#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

namespace {

std::string pair_name(Eigen::Index i, Eigen::Index j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

KernelMatrix make_kernel(Eigen::MatrixXd entries, KernelMeta meta) {
  const Eigen::Index d = entries.rows();
  if (d == 0 || entries.cols() != d)
    throw ShapeError("kernel must be a non-empty square matrix, got " +
                     std::to_string(entries.rows()) + "x" + std::to_string(entries.cols()));
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(std::abs(entries(i, i) - 1.0) <= 1e-9))
      throw ValidationError("kernel diagonal entry " + std::to_string(i) + " is " +
                            format_double(entries(i, i)) + ", expected 1");
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = entries(i, j);
      if (!(v >= -1e-9 && v <= 1.0 + 1e-9))
        throw ValidationError("kernel entry " + pair_name(i, j) + " = " + format_double(v) +
                              " outside [0, 1]");
      if (j > i && !(std::abs(v - entries(j, i)) <= 1e-10))
        throw ValidationError("kernel is not symmetric at " + pair_name(i, j));
    }
  }
  entries = entries.cwiseMax(0.0).cwiseMin(1.0);
  entries.diagonal().setOnes();
  return {std::move(entries), std::move(meta)};
}

KernelMatrix compute_kernel(std::span<const MPS> states, std::size_t jobs) {
  if (states.empty()) throw ValidationError("kernel needs at least one state");
  const std::size_t d = states.size();
  for (std::size_t i = 0; i < d; ++i) {
    if (states[i].n_sites() != states[0].n_sites())
      throw ValidationError("state " + std::to_string(i) + " has " +
                            std::to_string(states[i].n_sites()) + " sites, expected " +
                            std::to_string(states[0].n_sites()));
    const double n = norm(states[i]);
    if (!(std::abs(n - 1.0) <= 1e-6))
      throw ValidationError("state " + std::to_string(i) + " is not normalized (norm " +
                            format_double(n) + ")");
  }
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  parallel_for(d, jobs, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double o = overlap(states[i], states[j]);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = o * o;
    }
  });
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = i + 1; j < k.cols(); ++j) k(j, i) = k(i, j);
  k = k.cwiseMin(1.0);
  KernelMatrix out;
  out.entries = std::move(k);
  out.meta.n_sites = states[0].n_sites();
  return out;
}

Eigen::MatrixXd kernel_distance(const KernelMatrix& k) {
  Eigen::MatrixXd d = (2.0 - 2.0 * k.entries.array()).max(0.0).sqrt().matrix();
  d.diagonal().setZero();
  return d;
}

void write_kernel_csv(std::ostream& out, const KernelMatrix& k) {
  const Eigen::Index d = k.entries.rows();
  out << d << '\n';
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j) out << ',';
      out << format_double(k.entries(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed to write kernel CSV");
}

KernelMatrix read_kernel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("kernel CSV is empty");
  long long d = 0;
  try {
    std::size_t used = 0;
    d = std::stoll(line, &used);
    if (line.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ValidationError("kernel CSV must start with the matrix size, got '" + line + "'");
  }
  if (d <= 0) throw ValidationError("kernel CSV declares size " + std::to_string(d));
  Eigen::MatrixXd m(d, d);
  for (long long i = 0; i < d; ++i) {
    if (!std::getline(in, line))
      throw ValidationError("kernel CSV has " + std::to_string(i) + " rows, expected " + std::to_string(d));
    std::istringstream row(line);
    std::string cell;
    long long j = 0;
    while (std::getline(row, cell, ',')) {
      if (j >= d) throw ValidationError("kernel CSV row " + std::to_string(i) + " has too many columns");
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(cell, &used);
        if (cell.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ValidationError("kernel CSV cell (" + std::to_string(i) + "," + std::to_string(j) +
                              ") is not a number: '" + cell + "'");
      }
      ++j;
    }
    if (j != d)
      throw ValidationError("kernel CSV row " + std::to_string(i) + " has " + std::to_string(j) +
                            " columns, expected " + std::to_string(d));
  }
  return make_kernel(std::move(m));
}

std::string kernel_manifest(const KernelMatrix& k) {
  nlohmann::ordered_json j = {{"size", k.size()},
                              {"model", k.meta.model},
                              {"grid", k.meta.grid},
                              {"grid_digest", k.meta.grid_digest},
                              {"n_sites", k.meta.n_sites},
                              {"chi", k.meta.chi},
                              {"seed", k.meta.seed},
                              {"energy_tol", k.meta.energy_tol},
                              {"eig_tol", k.meta.eig_tol},
                              {"svd_cutoff", k.meta.svd_cutoff}};
  return j.dump(2) + "\n";
}

KernelMeta meta_from_manifest(std::string_view text) {
  KernelMeta m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.model = j.value("model", std::string{});
    m.grid = j.value("grid", std::string{});
    m.grid_digest = j.value("grid_digest", std::string{});
    m.n_sites = j.value("n_sites", std::size_t{0});
    m.chi = j.value("chi", std::size_t{0});
    m.seed = j.value("seed", std::uint64_t{0});
    m.energy_tol = j.value("energy_tol", 0.0);
    m.eig_tol = j.value("eig_tol", 0.0);
    m.svd_cutoff = j.value("svd_cutoff", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed kernel manifest: ") + e.what());
  }
  return m;
}

}  // namespace phasemap
