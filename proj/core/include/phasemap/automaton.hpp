#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "phasemap/hamiltonian.hpp"
#include "phasemap/tensor.hpp"

namespace phasemap {

/// Finite-state-automaton picture of a local Hamiltonian.
///
/// Nodes are numbered from 0. Node 0 is the start node where every path
/// begins and node_count-1 is the final node where every path ends. Path p
/// contributes p+1 links labelled (p, lambda); its intermediate nodes are
/// numbered consecutively after those of path p-1, so the generic graph has
/// d(d+1)/2 + 2 nodes.
struct AutomatonGraph {
  struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    int p = 0;
    int lambda = 0;
    SiteOperator op;
    double coefficient = 1.0;
  };

  int d = 0;
  std::size_t node_count = 0;
  std::vector<Edge> edges;

  std::size_t final_node() const noexcept { return node_count - 1; }
};

/// Builds the automaton. The term coefficient sits on the link entering the
/// final node (lambda == p); all other links carry coefficient 1.
AutomatonGraph build_automaton(const HamiltonianSpec& spec);

/// An entry of the operator-valued matrix W: coefficient * op.
struct OperatorEntry {
  SiteOperator op;
  double coefficient = 1.0;

  Tensor dense() const { return coefficient * op.matrix; }
};

/// H = l_1 W W ... W r_N, with l_1 the first row and r_N the last column of W.
class MPO {
 public:
  MPO(std::size_t bond_dim, std::size_t n_sites);

  std::size_t bond_dim() const noexcept { return bond_dim_; }
  std::size_t n_sites() const noexcept { return n_sites_; }

  const std::optional<OperatorEntry>& at(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, OperatorEntry entry);

  std::vector<std::optional<OperatorEntry>> left_boundary() const;
  std::vector<std::optional<OperatorEntry>> right_boundary() const;

  /// Nonzero blocks of the site-`site` tensor, with the boundary row/column
  /// selected at the ends. Used by DMRG.
  struct Block {
    std::size_t row = 0;
    std::size_t col = 0;
    Tensor op;  ///< 2x2 dense operator including the coefficient
  };
  struct SiteTensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Block> blocks;
  };
  SiteTensor site(std::size_t index) const;

 private:
  std::size_t bond_dim_;
  std::size_t n_sites_;
  std::vector<std::optional<OperatorEntry>> w_;
};

/// Fills W from the automaton links and sets the identity corners.
MPO automaton_to_mpo(const AutomatonGraph& graph, std::size_t n_sites);

/// Convenience: automaton_to_mpo(build_automaton(spec), spec.n_sites).
MPO build_mpo(const HamiltonianSpec& spec);

/// Largest chain for which dense 2^N x 2^N matrices are allowed.
inline constexpr std::size_t kMaxDenseSites = 14;

/// Evaluates l_1 W ... W r_N literally. Site 0 is the most significant bit of
/// the basis index and |0> is the +1 eigenstate of Sz.
Tensor mpo_to_dense(const MPO& mpo);

}  // namespace phasemap
