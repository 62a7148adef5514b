#include "phasemap/dmrg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "phasemap/eigensolver.hpp"
#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

void DmrgConfig::validate() const {
  if (chi == 0) throw ValidationError("chi must be positive");
  if (max_sweeps == 0) throw ValidationError("max_sweeps must be positive");
  if (!(energy_tol > 0.0)) throw ValidationError("energy_tol must be positive");
  if (!(svd_cutoff >= 0.0)) throw ValidationError("svd_cutoff must be >= 0");
  if (!(eig_tol > 0.0)) throw ValidationError("eig_tol must be positive");
  if (eig_max_iter == 0) throw ValidationError("eig_max_iter must be positive");
  if (!(noise >= 0.0)) throw ValidationError("noise must be >= 0");
}

bool same_config(const DmrgConfig& a, const DmrgConfig& b) {
  return a.chi == b.chi && a.max_sweeps == b.max_sweeps && a.energy_tol == b.energy_tol &&
         a.svd_cutoff == b.svd_cutoff && a.seed == b.seed && a.eig_tol == b.eig_tol &&
         a.eig_max_iter == b.eig_max_iter && a.noise == b.noise && a.noise_sweeps == b.noise_sweeps &&
         a.project_symmetric == b.project_symmetric;
}

namespace {

using Eigen::Index;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

Index idx(std::size_t n) { return static_cast<Index>(n); }

// Environment: one matrix per MPO bond index. Left environments are indexed
// (bra, ket), right environments (ket, bra).
using Env = std::vector<Mat>;

Env trivial_env() { return Env{Mat::Ones(1, 1)}; }

Env grow_left(const Env& left, const Tensor& a, const MPO::SiteTensor& w) {
  const Index l = idx(a.dim(0)), r = idx(a.dim(2));
  const ConstMatMap a_wide(a.data().data(), l, 2 * r);   // [l, (s r)]
  const ConstMatMap a_tall(a.data().data(), 2 * l, r);   // [(l s), r]
  std::vector<Mat> p(w.rows);
  std::vector<Mat> q(w.cols);
  for (const auto& blk : w.blocks) {
    Mat& pa = p[blk.row];
    if (pa.size() == 0) pa.noalias() = left[blk.row] * a_wide;
    Mat& qb = q[blk.col];
    if (qb.size() == 0) qb = Mat::Zero(l, 2 * r);
    for (Index t = 0; t < 2; ++t)
      for (Index s = 0; s < 2; ++s) {
        const double v = blk.op(t, s);
        if (v != 0.0) qb.middleCols(t * r, r) += v * pa.middleCols(s * r, r);
      }
  }
  Env out(w.cols);
  for (std::size_t b = 0; b < w.cols; ++b) {
    if (q[b].size() == 0) {
      out[b] = Mat::Zero(r, r);
      continue;
    }
    out[b].noalias() = a_tall.transpose() * ConstMatMap(q[b].data(), 2 * l, r);
  }
  return out;
}

Env grow_right(const Env& right, const Tensor& b, const MPO::SiteTensor& w) {
  const Index l = idx(b.dim(0)), r = idx(b.dim(2));
  const ConstMatMap b_wide(b.data().data(), l, 2 * r);
  const ConstMatMap b_tall(b.data().data(), 2 * l, r);
  std::vector<Mat> p(w.cols);
  std::vector<Mat> q(w.rows);
  for (const auto& blk : w.blocks) {
    Mat& pb = p[blk.col];
    if (pb.size() == 0) pb.noalias() = b_tall * right[blk.col];  // [(l s), r'] == [l, (s r')]
    Mat& qa = q[blk.row];
    if (qa.size() == 0) qa = Mat::Zero(l, 2 * r);
    const ConstMatMap pw(pb.data(), l, 2 * r);
    for (Index t = 0; t < 2; ++t)
      for (Index s = 0; s < 2; ++s) {
        const double v = blk.op(t, s);
        if (v != 0.0) qa.middleCols(t * r, r) += v * pw.middleCols(s * r, r);
      }
  }
  Env out(w.rows);
  for (std::size_t a = 0; a < w.rows; ++a) {
    if (q[a].size() == 0) {
      out[a] = Mat::Zero(l, l);
      continue;
    }
    out[a].noalias() = q[a] * b_wide.transpose();
  }
  return out;
}

// Effective two-site Hamiltonian acting on theta[l, s1, s2, r].
class TwoSiteOperator {
 public:
  TwoSiteOperator(const Env& left, const MPO::SiteTensor& w1, const MPO::SiteTensor& w2,
                  const Env& right, std::size_t l, std::size_t r)
      : left_(left), w1_(w1), w2_(w2), right_(right), l_(idx(l)), r_(idx(r)) {
    x_.resize(w1.rows);
    y_.resize(w1.cols);
    z_.resize(w2.cols);
  }

  std::size_t dim() const { return static_cast<std::size_t>(l_ * 4 * r_); }

  void apply(std::span<const double> in, std::span<double> out) {
    const Index l = l_, r = r_;
    const ConstMatMap theta(in.data(), l, 4 * r);
    for (auto& m : x_) m.resize(0, 0);
    for (auto& m : y_) m.resize(0, 0);
    for (auto& m : z_) m.resize(0, 0);

    for (const auto& blk : w1_.blocks) {
      Mat& xa = x_[blk.row];
      if (xa.size() == 0) xa.noalias() = left_[blk.row] * theta;  // [l', s1, s2, r]
      Mat& yc = y_[blk.col];
      if (yc.size() == 0) yc = Mat::Zero(l, 4 * r);
      for (Index t = 0; t < 2; ++t)
        for (Index s = 0; s < 2; ++s) {
          const double v = blk.op(t, s);
          if (v != 0.0) yc.middleCols(t * 2 * r, 2 * r) += v * xa.middleCols(s * 2 * r, 2 * r);
        }
    }
    for (const auto& blk : w2_.blocks) {
      const Mat& yc = y_[blk.row];
      if (yc.size() == 0) continue;
      Mat& zb = z_[blk.col];
      if (zb.size() == 0) zb = Mat::Zero(l, 4 * r);
      for (Index t1 = 0; t1 < 2; ++t1)
        for (Index t = 0; t < 2; ++t)
          for (Index s = 0; s < 2; ++s) {
            const double v = blk.op(t, s);
            if (v != 0.0)
              zb.middleCols(t1 * 2 * r + t * r, r) += v * yc.middleCols(t1 * 2 * r + s * r, r);
          }
    }
    MatMap result(out.data(), 4 * l, r);
    result.setZero();
    for (std::size_t b = 0; b < z_.size(); ++b) {
      if (z_[b].size() == 0) continue;
      result.noalias() += ConstMatMap(z_[b].data(), 4 * l, r) * right_[b];
    }
  }

 private:
  const Env& left_;
  const MPO::SiteTensor& w1_;
  const MPO::SiteTensor& w2_;
  const Env& right_;
  Index l_, r_;
  std::vector<Mat> x_, y_, z_;
};

struct Sweeper {
  const DmrgConfig& config;
  std::vector<MPO::SiteTensor> w;
  MPS psi;
  std::vector<Env> left, right;  // left[i]: sites < i; right[i]: sites >= i
  double sweep_max_discarded = 0.0;
  double noise = 0.0;
  Rng rng{0};

  Sweeper(const MPO& mpo, const DmrgConfig& cfg) : config(cfg) {
    const std::size_t n = mpo.n_sites();
    for (std::size_t i = 0; i < n; ++i) w.push_back(mpo.site(i));
    psi = random_mps(n, std::min<std::size_t>(cfg.chi, 4), cfg.seed);
    left.resize(n + 1);
    right.resize(n + 1);
    left[0] = trivial_env();
    right[n] = trivial_env();
    for (std::size_t i = n - 1; i >= 2; --i) right[i] = grow_right(right[i + 1], psi.sites[i], w[i]);
  }

  // Optimizes sites (i, i+1), then splits moving the center right or left.
  double optimize(std::size_t i, bool move_right) {
    Tensor& a = psi.sites[i];
    Tensor& b = psi.sites[i + 1];
    const std::size_t l = a.dim(0), m = a.dim(2), r = b.dim(2);
    std::vector<double> theta(l * 4 * r);
    MatMap(theta.data(), idx(2 * l), idx(2 * r)).noalias() =
        ConstMatMap(a.data().data(), idx(2 * l), idx(m)) *
        ConstMatMap(b.data().data(), idx(m), idx(2 * r));

    TwoSiteOperator heff(left[i], w[i], w[i + 1], right[i + 2], l, r);
    Eigenpair pair;
    try {
      pair = lowest_eigenpair(
          [&heff](std::span<const double> x, std::span<double> y) { heff.apply(x, y); },
          heff.dim(), theta, config.eig_tol, config.eig_max_iter);
    } catch (const EigenSolverError& e) {
      throw NumericalError("DMRG local eigensolver failed at sites (" + std::to_string(i) + "," +
                           std::to_string(i + 1) + "): " + e.what());
    }

    if (noise > 0.0) {
      const double scale = noise / std::sqrt(static_cast<double>(pair.vector.size()));
      for (double& x : pair.vector) x += scale * rng.uniform(-1.0, 1.0);
    }
    auto split = svd_truncate(Tensor({l, 2, 2, r}, std::move(pair.vector)), 2, config.chi,
                              config.svd_cutoff);
    sweep_max_discarded = std::max(sweep_max_discarded, split.report.discarded_weight);
    double snorm = 0.0;
    for (double s : split.s) snorm += s * s;
    snorm = std::sqrt(snorm);
    const std::size_t k = split.s.size();
    if (move_right) {
      a = std::move(split.u);
      b = std::move(split.vt);
      auto bd = b.data();
      for (std::size_t row = 0; row < k; ++row)
        for (std::size_t c = 0; c < 2 * r; ++c) bd[row * 2 * r + c] *= split.s[row] / snorm;
      left[i + 1] = grow_left(left[i], a, w[i]);
      psi.canonical_center = i + 1;
    } else {
      a = std::move(split.u);
      b = std::move(split.vt);
      auto ad = a.data();
      for (std::size_t row = 0; row < 2 * l; ++row)
        for (std::size_t c = 0; c < k; ++c) ad[row * k + c] *= split.s[c] / snorm;
      right[i + 1] = grow_right(right[i + 2], b, w[i + 1]);
      psi.canonical_center = i;
    }
    return pair.value;
  }

  double sweep() {
    const std::size_t n = psi.n_sites();
    sweep_max_discarded = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i + 2 < n; ++i) energy = optimize(i, true);
    energy = optimize(n - 2, false);
    for (std::size_t i = n - 2; i-- > 0;) energy = optimize(i, false);
    return energy;
  }
};

}  // namespace

GroundStateResult ground_state(const MPO& mpo, const DmrgConfig& config) {
  return ground_state(mpo, config, {});
}

GroundStateResult ground_state(const HamiltonianSpec& spec, const DmrgConfig& config) {
  const auto symmetries = config.project_symmetric ? product_symmetries(spec) : std::vector<ProductOperator>{};
  return ground_state(build_mpo(spec), config, symmetries);
}

GroundStateResult ground_state(const MPO& mpo, const DmrgConfig& config,
                               std::span<const ProductOperator> symmetries) {
  config.validate();
  for (const auto& q : symmetries)
    if (q.ops.size() != mpo.n_sites())
      throw ValidationError("symmetry '" + q.name + "' does not match the chain length");
  if (mpo.n_sites() < 3)
    throw ValidationError("DMRG needs at least 3 sites, got " + std::to_string(mpo.n_sites()));
  if (config.chi < 2 && mpo.bond_dim() > 2)
    throw ValidationError("chi must be >= 2 for an interacting model");

  Sweeper sweeper(mpo, config);
  sweeper.rng = Rng(splitmix64(config.seed ^ 0x6e6f697365ULL));
  GroundStateResult result;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s <= config.max_sweeps; ++s) {
    // Noise decays by 10x per sweep; only noise-free sweeps count for convergence.
    sweeper.noise = s <= config.noise_sweeps ? config.noise * std::pow(0.1, static_cast<double>(s - 1)) : 0.0;
    const double e = sweeper.sweep();
    result.sweeps_used = s;
    if (sweeper.noise > 0.0) continue;
    if (std::abs(e - previous) < config.energy_tol) {
      result.converged = true;
      break;
    }
    previous = e;
  }
  result.max_discarded_weight = sweeper.sweep_max_discarded;
  result.state = std::move(sweeper.psi);
  result.energy = expectation(result.state, mpo);

  if (!symmetries.empty()) {
    if (auto sym = symmetric_projection(result.state, symmetries, config.chi, config.svd_cutoff)) {
      const double e = expectation(*sym, mpo);
      if (e <= result.energy + config.energy_tol) {
        result.state = std::move(*sym);
        result.energy = e;
      }
    }
  }
  return result;
}

std::optional<MPS> symmetric_projection(const MPS& a, std::span<const ProductOperator> symmetries,
                                        std::size_t chi, double cutoff, double min_weight) {
  MPS m = a;
  const double before = overlap(a, a);
  for (const auto& q : symmetries) {
    const MPS qm = apply_product(m, q);
    // Weight kept by (1 + Q)/2 is (1 + <Q>)/2; later projections only lower it.
    if (!((1.0 + overlap(m, qm) / overlap(m, m)) / 2 >= min_weight)) return std::nullopt;
    m = add(m, qm);
    compress(m, chi, cutoff);
  }
  // Weight of the projection: |P a|^2 = <a|P a> for the orthogonal projector P.
  double kept = overlap(a, m);
  kept = kept * kept / before;
  if (!(kept >= min_weight)) return std::nullopt;
  return m;
}

double expectation(const MPS& a, const MPO& mpo) {
  a.validate();
  if (a.n_sites() != mpo.n_sites())
    throw ValidationError("expectation: MPS has " + std::to_string(a.n_sites()) +
                          " sites, MPO has " + std::to_string(mpo.n_sites()));
  Env env = trivial_env();
  for (std::size_t i = 0; i < a.n_sites(); ++i) {
    if (a.sites[i].dim(1) != 2) throw ValidationError("expectation: physical dimension must be 2");
    env = grow_left(env, a.sites[i], mpo.site(i));
  }
  const double norm2 = overlap(a, a);
  if (!(norm2 > 0.0)) throw NumericalError("expectation of a zero state");
  return env[0](0, 0) / norm2;
}

namespace {

constexpr char kMagic[8] = {'P', 'H', 'M', 'P', 'S', 0, 0, 0};
constexpr std::uint32_t kVersion = 2;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw ValidationError("state file truncated");
  return value;
}

}  // namespace

void save_ground_state(std::ostream& out, const GroundStateResult& result,
                       const DmrgConfig& config) {
  const MPS& psi = result.state;
  psi.validate();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, config.chi);
  put<std::uint64_t>(out, config.max_sweeps);
  put<double>(out, config.energy_tol);
  put<double>(out, config.svd_cutoff);
  put<std::uint64_t>(out, config.seed);
  put<double>(out, config.eig_tol);
  put<std::uint64_t>(out, config.eig_max_iter);
  put<double>(out, config.noise);
  put<std::uint64_t>(out, config.noise_sweeps);
  put<std::uint8_t>(out, config.project_symmetric ? 1 : 0);
  put<double>(out, result.energy);
  put<std::uint64_t>(out, result.sweeps_used);
  put<std::uint8_t>(out, result.converged ? 1 : 0);
  put<double>(out, result.max_discarded_weight);
  put<std::int64_t>(out, psi.canonical_center ? static_cast<std::int64_t>(*psi.canonical_center) : -1);
  put<std::uint64_t>(out, psi.n_sites());
  for (auto d : psi.bond_dims()) put<std::uint64_t>(out, d);
  for (const auto& t : psi.sites) put<std::uint64_t>(out, t.dim(1));
  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  for (const auto& t : psi.sites) {
    const auto bytes = std::as_bytes(t.data());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    checksum ^= fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    checksum = splitmix64(checksum);
  }
  put<std::uint64_t>(out, checksum);
  if (!out) throw std::runtime_error("failed to write state file");
}

StoredGroundState load_ground_state(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ValidationError("not a phasemap state file");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw ValidationError("unsupported state file version " + std::to_string(version));

  StoredGroundState st;
  st.config.chi = get<std::uint64_t>(in);
  st.config.max_sweeps = get<std::uint64_t>(in);
  st.config.energy_tol = get<double>(in);
  st.config.svd_cutoff = get<double>(in);
  st.config.seed = get<std::uint64_t>(in);
  st.config.eig_tol = get<double>(in);
  st.config.eig_max_iter = get<std::uint64_t>(in);
  st.config.noise = get<double>(in);
  st.config.noise_sweeps = get<std::uint64_t>(in);
  st.config.project_symmetric = get<std::uint8_t>(in) != 0;
  st.result.energy = get<double>(in);
  st.result.sweeps_used = get<std::uint64_t>(in);
  st.result.converged = get<std::uint8_t>(in) != 0;
  st.result.max_discarded_weight = get<double>(in);
  const auto center = get<std::int64_t>(in);
  const auto n = get<std::uint64_t>(in);
  if (n == 0 || n > 100000) throw ValidationError("state file has an implausible site count");
  std::vector<std::uint64_t> bonds(n + 1), phys(n);
  for (auto& b : bonds) b = get<std::uint64_t>(in);
  for (auto& p : phys) p = get<std::uint64_t>(in);

  MPS& psi = st.result.state;
  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor t({bonds[i], phys[i], bonds[i + 1]});
    auto bytes = std::as_writable_bytes(t.data());
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
      throw ValidationError("state file truncated");
    checksum ^= fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    checksum = splitmix64(checksum);
    psi.sites.push_back(std::move(t));
  }
  if (get<std::uint64_t>(in) != checksum) throw ValidationError("state file checksum mismatch");
  if (center >= 0) psi.canonical_center = static_cast<std::size_t>(center);
  psi.validate();
  return st;
}

}  // namespace phasemap
