#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>

#include "phasemap/automaton.hpp"
#include "phasemap/mps.hpp"

namespace phasemap {

struct DmrgConfig {
  std::size_t chi = 16;
  std::size_t max_sweeps = 30;
  double energy_tol = 1e-8;
  double svd_cutoff = 1e-14;
  std::uint64_t seed = 0;
  double eig_tol = 1e-10;
  /// Operator applications allowed per local eigenproblem.
  std::size_t eig_max_iter = 1000;
  /// Random perturbation added to the two-site wavefunction before
  /// truncation, relative to its norm, in the first `noise_sweeps` sweeps
  /// (shrinking 10x per sweep). Lets the basis escape configurations the
  /// exact local update cannot leave, e.g. on classical parameter lines.
  double noise = 1e-1;
  std::size_t noise_sweeps = 3;
  /// Used by the HamiltonianSpec overload: pick the symmetric member of a
  /// near-degenerate ground manifold (see below).
  bool project_symmetric = true;

  void validate() const;
};

struct GroundStateResult {
  MPS state;
  double energy = 0.0;
  std::size_t sweeps_used = 0;
  bool converged = false;
  /// Largest discarded weight over the truncations of the last sweep.
  double max_discarded_weight = 0.0;
};

/// Two-site DMRG. Sweeps until consecutive sweep energies differ by less than
/// energy_tol or max_sweeps is reached; non-convergence is reported through
/// `converged`, not an exception. The returned state is normalized with its
/// orthogonality center at site 0, and `energy` is its recomputed MPO
/// expectation value. Deterministic for a fixed config.
///
/// Throws NumericalError naming the site if a local eigenproblem fails.
GroundStateResult ground_state(const MPO& mpo, const DmrgConfig& config);

/// As above, then replaces the converged state by its projection onto the +1
/// sector of the given product symmetries (compressed back to chi) whenever
/// that projection keeps at least 1% of the weight and does not raise the
/// energy by more than energy_tol. Within a near-degenerate ground manifold
/// this picks the symmetric member instead of an arbitrary one.
GroundStateResult ground_state(const MPO& mpo, const DmrgConfig& config,
                               std::span<const ProductOperator> symmetries);

/// Builds the MPO and, if config.project_symmetric, uses the spec's
/// product_symmetries().
GroundStateResult ground_state(const HamiltonianSpec& spec, const DmrgConfig& config);

/// The symmetric projection of a state, or nullopt if less than `min_weight`
/// of its norm squared survives. Compressed to chi.
std::optional<MPS> symmetric_projection(const MPS& a, std::span<const ProductOperator> symmetries,
                                        std::size_t chi, double cutoff, double min_weight = 0.01);

/// <a|H|a> / <a|a>.
double expectation(const MPS& a, const MPO& mpo);

/// Binary state container: version tag, producing config, result metadata
/// and tensor data.
void save_ground_state(std::ostream& out, const GroundStateResult& result,
                       const DmrgConfig& config);

struct StoredGroundState {
  GroundStateResult result;
  DmrgConfig config;
};
StoredGroundState load_ground_state(std::istream& in);

/// Whether two configs would produce the same state (all fields equal).
bool same_config(const DmrgConfig& a, const DmrgConfig& b);

}  // namespace phasemap
