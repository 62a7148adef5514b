#include "phasemap/exact.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <string>

#include "phasemap/eigensolver.hpp"
#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

namespace {

void check_size(const HamiltonianSpec& spec, std::size_t limit, const char* what) {
  spec.validate();
  if (spec.n_sites > limit)
    throw SizeError(std::string(what) + " refused for N=" + std::to_string(spec.n_sites) +
                    " (limit " + std::to_string(limit) + ")");
}

bool is_identity(const SiteOperator& op) {
  return op.matrix(0, 0) == 1.0 && op.matrix(1, 1) == 1.0 && op.matrix(0, 1) == 0.0 &&
         op.matrix(1, 0) == 0.0;
}

// Applies a 2x2 operator to the site whose bit has weight `stride`.
void apply_site(const SiteOperator& op, std::vector<double>& v, std::size_t stride) {
  const double a = op.matrix(0, 0), b = op.matrix(0, 1), c = op.matrix(1, 0), d = op.matrix(1, 1);
  for (std::size_t base = 0; base < v.size(); base += 2 * stride)
    for (std::size_t k = base; k < base + stride; ++k) {
      const double up = v[k], down = v[k + stride];
      v[k] = a * up + b * down;
      v[k + stride] = c * up + d * down;
    }
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void canonicalize_sign(std::vector<double>& v) {
  for (double x : v)
    if (std::abs(x) > 1e-12) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
}

}  // namespace

void apply_hamiltonian(const HamiltonianSpec& spec, const double* x, double* y) {
  const std::size_t n = spec.n_sites;
  const std::size_t dim = std::size_t{1} << n;
  std::fill(y, y + dim, 0.0);
  std::vector<double> work(dim);
  for (const auto& term : spec.terms) {
    const auto p = static_cast<std::size_t>(term.p);
    for (std::size_t j = 0; j + p < n; ++j) {
      work.assign(x, x + dim);
      for (std::size_t q = 0; q <= p; ++q) {
        if (is_identity(term.ops[q])) continue;
        apply_site(term.ops[q], work, std::size_t{1} << (n - 1 - (j + q)));
      }
      for (std::size_t k = 0; k < dim; ++k) y[k] += term.coefficient * work[k];
    }
  }
}

Eigen::MatrixXd dense_hamiltonian(const HamiltonianSpec& spec) {
  check_size(spec, kMaxDenseMatrixSites, "dense Hamiltonian");
  const std::size_t n = spec.n_sites;
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& term : spec.terms) {
    const auto p = static_cast<std::size_t>(term.p);
    for (std::size_t j = 0; j + p < n; ++j) {
      Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(Eigen::Index{1} << j, Eigen::Index{1} << j);
      for (const auto& op : term.ops) {
        Eigen::MatrixXd m(2, 2);
        m << op.matrix(0, 0), op.matrix(0, 1), op.matrix(1, 0), op.matrix(1, 1);
        prod = kron(prod, m);
      }
      const auto rest = Eigen::Index{1} << (n - j - p - 1);
      prod = kron(prod, Eigen::MatrixXd::Identity(rest, rest));
      h += term.coefficient * prod;
    }
  }
  return h;
}

DenseSpectrumResult exact_ground_state(const HamiltonianSpec& spec) {
  check_size(spec, kMaxExactSites, "exact diagonalization");
  DenseSpectrumResult out;
  const std::size_t dim = std::size_t{1} << spec.n_sites;

  if (spec.n_sites <= kMaxFullDiagSites) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_hamiltonian(spec));
    if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    const auto& vals = solver.eigenvalues();
    out.ground_energy = vals(0);
    out.gap = dim > 1 ? vals(1) - vals(0) : 0.0;
    const Eigen::VectorXd v = solver.eigenvectors().col(0);
    out.ground_vector.assign(v.data(), v.data() + v.size());
  } else {
    const LinearMap h = [&spec](std::span<const double> x, std::span<double> y) {
      apply_hamiltonian(spec, x.data(), y.data());
    };
    std::vector<double> start(dim);
    Rng rng(0x5eed);
    for (double& s : start) s = rng.uniform(-0.5, 0.5);
    const LanczosOptions options{64, 8};
    const auto e0 = lowest_eigenpair(h, dim, start, 1e-12, 20000, options);

    // Deflate the ground state to reach E1.
    double bound = 0.0;
    for (const auto& t : spec.terms) bound += std::abs(t.coefficient) * static_cast<double>(spec.n_sites);
    const double shift = 2.0 * bound + 1.0;
    const std::vector<double>& g = e0.vector;
    const LinearMap deflated = [&](std::span<const double> x, std::span<double> y) {
      apply_hamiltonian(spec, x.data(), y.data());
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += g[k] * x[k];
      for (std::size_t k = 0; k < dim; ++k) y[k] += shift * dot * g[k];
    };
    for (double& s : start) s = rng.uniform(-0.5, 0.5);
    const auto e1 = lowest_eigenpair(deflated, dim, start, 1e-12, 20000, options);

    out.ground_energy = e0.value;
    out.gap = std::max(0.0, e1.value - e0.value);
    out.ground_vector = e0.vector;
  }
  out.gap = std::max(0.0, out.gap);
  out.degenerate = out.gap < kDegenerateGap;
  canonicalize_sign(out.ground_vector);
  return out;
}

std::string to_text(const OracleFixtureFile& file) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::object();
  for (const auto& [key, f] : file.entries)
    entries[key] = {{"description", f.description},
                    {"ground_energy", f.ground_energy},
                    {"gap", f.gap}};
  nlohmann::ordered_json j = {{"version", file.version}, {"entries", entries}};
  return j.dump(2) + "\n";
}

OracleFixtureFile fixtures_from_text(std::string_view text) {
  OracleFixtureFile file;
  try {
    const auto j = nlohmann::json::parse(text);
    file.version = j.at("version").get<int>();
    if (file.version != 1)
      throw ValidationError("unsupported fixture version " + std::to_string(file.version));
    for (const auto& [key, e] : j.at("entries").items())
      file.entries[key] = {e.at("ground_energy").get<double>(), e.at("gap").get<double>(),
                           e.value("description", std::string{})};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed fixture file: ") + e.what());
  }
  return file;
}

}  // namespace phasemap
