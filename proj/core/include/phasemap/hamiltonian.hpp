#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "phasemap/operators.hpp"

namespace phasemap {

/// One product term: coefficient * ops[0]_j ops[1]_{j+1} ... ops[p]_{j+p},
/// summed over every j where it fits on the open chain.
struct InteractionTerm {
  int p = 0;  ///< path index: the term spans p+1 consecutive sites
  double coefficient = 1.0;
  std::vector<SiteOperator> ops;
};

/// Translation-invariant open-chain Hamiltonian given as a sum of local terms
/// with interaction distance at most d.
struct HamiltonianSpec {
  int d = 0;
  std::vector<InteractionTerm> terms;
  std::size_t n_sites = 0;
  std::string description;
  /// Let path p reuse the first edge of path p-1 when both start with the same
  /// operator. Shrinks the automaton; off by default.
  bool merge_prefixes = false;

  /// Throws ValidationError if the spec is malformed.
  void validate() const;
};

/// JSON text: {"d":..,"n_sites":..,"description":..,"merge_prefixes":..,
/// "terms":[{"p":..,"coefficient":..,"ops":["Sx","I","Sx"]},...]}
std::string to_text(const HamiltonianSpec& spec);
HamiltonianSpec spec_from_text(std::string_view text);

/// Independent, mutually commuting Z2 symmetries of the Hamiltonian among the
/// Pauli strings prod sigma^x / prod sigma^z over all sites, even sites or odd
/// sites.
std::vector<ProductOperator> product_symmetries(const HamiltonianSpec& spec);

/// Stable 16-hex-digit digest of the canonical text form.
std::string digest(const HamiltonianSpec& spec);

}  // namespace phasemap
