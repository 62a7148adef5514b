#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "phasemap/mps.hpp"

namespace phasemap {

/// Where a kernel came from. Empty/zero fields mean "unknown" (e.g. a kernel
/// supplied from an external source).
struct KernelMeta {
  std::string model;
  std::string grid;
  std::string grid_digest;
  std::size_t n_sites = 0;
  std::size_t chi = 0;
  std::uint64_t seed = 0;
  double energy_tol = 0.0;
  double eig_tol = 0.0;
  double svd_cutoff = 0.0;
};

/// Symmetric D x D fidelity matrix with unit diagonal and entries in [0, 1].
struct KernelMatrix {
  Eigen::MatrixXd entries;
  KernelMeta meta;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
};

/// Checks symmetry (1e-10), unit diagonal (1e-9) and range [-1e-9, 1+1e-9],
/// then clamps into [0, 1] and sets the diagonal to exactly 1. Throws
/// ValidationError naming the first offending entry.
KernelMatrix make_kernel(Eigen::MatrixXd entries, KernelMeta meta = {});

/// K_ij = <i|j>^2 over the upper triangle, mirrored, diagonal set to 1.
/// Throws ValidationError naming the index of any state whose norm deviates
/// from 1 by more than 1e-6, or whose length differs from the first.
KernelMatrix compute_kernel(std::span<const MPS> states, std::size_t jobs = 1);

/// d_ij = sqrt(max(0, 2 - 2 K_ij)).
Eigen::MatrixXd kernel_distance(const KernelMatrix& k);

/// First line D, then D rows of D comma-separated values (17 significant digits).
void write_kernel_csv(std::ostream& out, const KernelMatrix& k);
/// Parses the CSV form and validates it with make_kernel. Metadata is empty.
KernelMatrix read_kernel_csv(std::istream& in);

/// JSON manifest describing a kernel file.
std::string kernel_manifest(const KernelMatrix& k);
KernelMeta meta_from_manifest(std::string_view text);

}  // namespace phasemap
