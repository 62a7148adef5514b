#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phasemap/operators.hpp"
#include "phasemap/tensor.hpp"

namespace phasemap {

/// Open-boundary matrix product state. Site tensors have shape
/// (left bond, physical, right bond); the outermost bonds have dimension 1.
struct MPS {
  std::vector<Tensor> sites;
  /// Orthogonality center, if the state is in mixed canonical form.
  std::optional<std::size_t> canonical_center;

  std::size_t n_sites() const noexcept { return sites.size(); }
  /// N+1 bond dimensions, first and last equal to 1.
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond_dim() const;

  /// Throws ShapeError if tensors are not rank 3 or bonds do not chain.
  void validate() const;
};

/// <a|b> by left-to-right transfer contraction, O(N chi^3).
double overlap(const MPS& a, const MPS& b);
double norm(const MPS& a);

/// Full 2^N amplitude vector; site 0 is the most significant bit.
std::vector<double> mps_to_dense(const MPS& a);

/// Product state from per-site amplitudes (a_0, a_1).
MPS product_state(std::span<const std::array<double, 2>> amplitudes);

/// Random state with bond dimension min(chi, 2^i, 2^(N-i)) at bond i and
/// entries uniform in [0, 1), brought to right-canonical form (center 0) and
/// normalized.
MPS random_mps(std::size_t n_sites, std::size_t chi, std::uint64_t seed);

/// Q|a> for a product operator Q (bond dimensions unchanged).
MPS apply_product(const MPS& a, const ProductOperator& q);

/// |a> + |b> as an MPS whose bond dimensions are the sums (not canonical).
MPS add(const MPS& a, const MPS& b);

/// Brings the state to right-canonical form with bond dimensions at most
/// chi (singular values below the relative cutoff dropped) and normalizes it.
/// Returns the largest discarded weight.
double compress(MPS& a, std::size_t chi, double cutoff);

/// Right-canonicalizes sites N-1..1 by QR and normalizes; center becomes 0.
void right_canonicalize(MPS& a);

/// Whether contracting the tensor with itself over (left, physical) gives the
/// identity on the right bond, within tol.
bool is_left_orthonormal(const Tensor& site, double tol);
/// Whether contracting the tensor with itself over (physical, right) gives the
/// identity on the left bond, within tol.
bool is_right_orthonormal(const Tensor& site, double tol);

}  // namespace phasemap
