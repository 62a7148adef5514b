#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "phasemap/hamiltonian.hpp"

namespace phasemap {

/// Largest chain handled by the exact solver.
inline constexpr std::size_t kMaxExactSites = 14;
/// Largest chain diagonalized with the dense solver; above it Lanczos is used.
inline constexpr std::size_t kMaxFullDiagSites = 10;
/// Largest chain for which dense_hamiltonian builds the full matrix.
inline constexpr std::size_t kMaxDenseMatrixSites = 12;
/// Gaps below this mark the ground state as degenerate.
inline constexpr double kDegenerateGap = 1e-10;

struct DenseSpectrumResult {
  double ground_energy = 0.0;
  /// Unit vector, first amplitude with |a| > 1e-12 positive.
  std::vector<double> ground_vector;
  /// E1 - E0 >= 0.
  double gap = 0.0;
  bool degenerate = false;
};

/// y = H x for the spec's Hamiltonian, applied term by term (site 0 is the
/// most significant bit).
void apply_hamiltonian(const HamiltonianSpec& spec, const double* x, double* y);

/// Dense H as a direct sum of Kronecker products. Throws SizeError above
/// kMaxDenseMatrixSites.
Eigen::MatrixXd dense_hamiltonian(const HamiltonianSpec& spec);

/// Lowest eigenpair and gap. Throws SizeError above kMaxExactSites.
DenseSpectrumResult exact_ground_state(const HamiltonianSpec& spec);

/// Frozen reference values keyed by a readable point name.
struct OracleFixture {
  double ground_energy = 0.0;
  double gap = 0.0;
  std::string description;
};

struct OracleFixtureFile {
  int version = 1;
  std::map<std::string, OracleFixture> entries;
};

std::string to_text(const OracleFixtureFile& file);
OracleFixtureFile fixtures_from_text(std::string_view text);

}  // namespace phasemap
