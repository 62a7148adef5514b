#include "phasemap/mps.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "phasemap/automaton.hpp"
#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

namespace {

using Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstSlice = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

// Physical slice s of a (l, d, r) site tensor as an l x r matrix.
ConstSlice slice(const Tensor& t, std::size_t s) {
  const auto l = static_cast<Index>(t.dim(0));
  const auto d = static_cast<Index>(t.dim(1));
  const auto r = static_cast<Index>(t.dim(2));
  return ConstSlice(t.data().data() + static_cast<Index>(s) * r, l, r,
                    Eigen::OuterStride<>(d * r));
}

}  // namespace

std::vector<std::size_t> MPS::bond_dims() const {
  std::vector<std::size_t> dims;
  if (sites.empty()) return dims;
  dims.push_back(sites.front().dim(0));
  for (const auto& t : sites) dims.push_back(t.dim(2));
  return dims;
}

std::size_t MPS::max_bond_dim() const {
  const auto dims = bond_dims();
  return dims.empty() ? 0 : *std::max_element(dims.begin(), dims.end());
}

void MPS::validate() const {
  if (sites.empty()) throw ShapeError("MPS has no sites");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].rank() != 3)
      throw ShapeError("MPS site " + std::to_string(i) + " is not a rank-3 tensor");
    if (i > 0 && sites[i - 1].dim(2) != sites[i].dim(0))
      throw ShapeError("MPS bond mismatch between sites " + std::to_string(i - 1) + " and " +
                       std::to_string(i));
  }
  if (sites.front().dim(0) != 1 || sites.back().dim(2) != 1)
    throw ShapeError("MPS boundary bonds must have dimension 1");
  if (canonical_center && *canonical_center >= sites.size())
    throw ShapeError("MPS canonical center out of range");
}

double overlap(const MPS& a, const MPS& b) {
  if (a.n_sites() != b.n_sites())
    throw ValidationError("overlap: states have " + std::to_string(a.n_sites()) + " and " +
                          std::to_string(b.n_sites()) + " sites");
  a.validate();
  b.validate();
  RowMatrix e = RowMatrix::Ones(1, 1);
  RowMatrix tmp;
  for (std::size_t i = 0; i < a.n_sites(); ++i) {
    const Tensor& x = a.sites[i];
    const Tensor& y = b.sites[i];
    if (x.dim(1) != y.dim(1))
      throw ValidationError("overlap: physical dimension differs at site " + std::to_string(i));
    RowMatrix next = RowMatrix::Zero(static_cast<Index>(x.dim(2)), static_cast<Index>(y.dim(2)));
    for (std::size_t s = 0; s < x.dim(1); ++s) {
      tmp.noalias() = e * slice(y, s);
      next.noalias() += slice(x, s).transpose() * tmp;
    }
    e = std::move(next);
  }
  return e(0, 0);
}

double norm(const MPS& a) { return std::sqrt(std::max(0.0, overlap(a, a))); }

std::vector<double> mps_to_dense(const MPS& a) {
  a.validate();
  if (a.n_sites() > kMaxDenseSites)
    throw SizeError("dense state refused for N=" + std::to_string(a.n_sites()) + " (limit " +
                    std::to_string(kMaxDenseSites) + ")");
  // psi: rows enumerate configurations of the sites so far, columns the open bond.
  RowMatrix psi = RowMatrix::Ones(1, 1);
  for (const auto& t : a.sites) {
    const auto l = static_cast<Index>(t.dim(0));
    const auto dr = static_cast<Index>(t.dim(1) * t.dim(2));
    RowMatrix next = psi * Eigen::Map<const RowMatrix>(t.data().data(), l, dr);
    // (configs, d*r) row-major is the same memory as (configs*d, r).
    psi = Eigen::Map<const RowMatrix>(next.data(), next.rows() * static_cast<Index>(t.dim(1)),
                                      static_cast<Index>(t.dim(2)));
  }
  return {psi.data(), psi.data() + psi.size()};
}

MPS product_state(std::span<const std::array<double, 2>> amplitudes) {
  if (amplitudes.empty()) throw ValidationError("product state needs at least one site");
  MPS m;
  for (const auto& a : amplitudes) m.sites.emplace_back(Tensor::Shape{1, 2, 1}, std::vector<double>{a[0], a[1]});
  return m;
}

void right_canonicalize(MPS& a) {
  a.validate();
  for (std::size_t i = a.n_sites() - 1; i > 0; --i) {
    // Site i as (l, d*r); QR of its transpose gives site = R^T Q^T.
    const std::size_t perm[] = {1, 2, 0};
    auto [q, r] = qr(a.sites[i].permuted(perm), 2);  // q: (d, r, k), r: (k, l)
    const std::size_t back[] = {2, 0, 1};
    a.sites[i] = q.permuted(back);
    a.sites[i - 1] = contract(a.sites[i - 1], {2}, r, {1});
  }
  const double n = a.sites.front().norm();
  if (!(n > 0.0)) throw NumericalError("cannot normalize a zero MPS");
  a.sites.front() *= 1.0 / n;
  a.canonical_center = 0;
}

MPS random_mps(std::size_t n_sites, std::size_t chi, std::uint64_t seed) {
  if (n_sites == 0) throw ValidationError("random_mps: n_sites must be positive");
  if (chi == 0) throw ValidationError("random_mps: chi must be positive");
  auto bond = [&](std::size_t i) {
    const std::size_t edge = std::min(i, n_sites - i);
    std::size_t dim = 1;
    for (std::size_t k = 0; k < edge && dim < chi; ++k) dim *= 2;
    return std::min(dim, chi);
  };
  Rng rng(seed);
  MPS m;
  for (std::size_t i = 0; i < n_sites; ++i) {
    Tensor t({bond(i), 2, bond(i + 1)});
    for (double& x : t.data()) x = rng.uniform();
    m.sites.push_back(std::move(t));
  }
  right_canonicalize(m);
  return m;
}

MPS apply_product(const MPS& a, const ProductOperator& q) {
  a.validate();
  if (q.ops.size() != a.n_sites())
    throw ValidationError("product operator has " + std::to_string(q.ops.size()) +
                          " sites, state has " + std::to_string(a.n_sites()));
  MPS out;
  for (std::size_t i = 0; i < a.n_sites(); ++i) {
    const std::size_t perm[] = {1, 0, 2};
    out.sites.push_back(contract(q.ops[i].matrix, {1}, a.sites[i], {1}).permuted(perm));
  }
  return out;
}

MPS add(const MPS& a, const MPS& b) {
  a.validate();
  b.validate();
  const std::size_t n = a.n_sites();
  if (b.n_sites() != n) throw ValidationError("add: states have different lengths");
  MPS out;
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor& x = a.sites[i];
    const Tensor& y = b.sites[i];
    const std::size_t d = x.dim(1);
    if (y.dim(1) != d) throw ValidationError("add: physical dimension differs at site " + std::to_string(i));
    const bool first = i == 0, last = i + 1 == n;
    const std::size_t l = first ? 1 : x.dim(0) + y.dim(0);
    const std::size_t r = last ? 1 : x.dim(2) + y.dim(2);
    const std::size_t yl = first ? 0 : x.dim(0), yr = last ? 0 : x.dim(2);
    Tensor t({l, d, r});
    for (std::size_t s = 0; s < d; ++s) {
      for (std::size_t p = 0; p < x.dim(0); ++p)
        for (std::size_t q = 0; q < x.dim(2); ++q) t(p, s, q) += x(p, s, q);
      for (std::size_t p = 0; p < y.dim(0); ++p)
        for (std::size_t q = 0; q < y.dim(2); ++q) t(yl + p, s, yr + q) += y(p, s, q);
    }
    out.sites.push_back(std::move(t));
  }
  return out;
}

double compress(MPS& a, std::size_t chi, double cutoff) {
  a.validate();
  const std::size_t n = a.n_sites();
  // Left-canonicalize, then truncate right to left.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto [q, r] = qr(a.sites[i], 2);
    a.sites[i] = std::move(q);
    a.sites[i + 1] = contract(r, {1}, a.sites[i + 1], {0});
  }
  double discarded = 0.0;
  for (std::size_t i = n - 1; i > 0; --i) {
    auto split = svd_truncate(a.sites[i], 1, chi, cutoff);
    discarded = std::max(discarded, split.report.discarded_weight);
    a.sites[i] = std::move(split.vt);
    Tensor us = std::move(split.u);
    auto d = us.data();
    const std::size_t k = split.s.size();
    for (std::size_t row = 0; row < us.dim(0); ++row)
      for (std::size_t c = 0; c < k; ++c) d[row * k + c] *= split.s[c];
    a.sites[i - 1] = contract(a.sites[i - 1], {2}, us, {0});
  }
  const double nrm = a.sites.front().norm();
  if (!(nrm > 0.0)) throw NumericalError("cannot compress a zero MPS");
  a.sites.front() *= 1.0 / nrm;
  a.canonical_center = 0;
  return discarded;
}

namespace {

bool near_identity(const RowMatrix& g, double tol) {
  return (g - RowMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

bool is_left_orthonormal(const Tensor& site, double tol) {
  const auto rows = static_cast<Index>(site.dim(0) * site.dim(1));
  const auto cols = static_cast<Index>(site.dim(2));
  Eigen::Map<const RowMatrix> a(site.data().data(), rows, cols);
  return near_identity(a.transpose() * a, tol);
}

bool is_right_orthonormal(const Tensor& site, double tol) {
  const auto rows = static_cast<Index>(site.dim(0));
  const auto cols = static_cast<Index>(site.dim(1) * site.dim(2));
  Eigen::Map<const RowMatrix> a(site.data().data(), rows, cols);
  return near_identity(a * a.transpose(), tol);
}

}  // namespace phasemap
