#include "phasemap/automaton.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <string>

#include "phasemap/error.hpp"

namespace phasemap {

AutomatonGraph build_automaton(const HamiltonianSpec& spec) {
  spec.validate();
  const int d = spec.d;

  std::map<int, const InteractionTerm*> by_path;
  for (const auto& t : spec.terms) by_path[t.p] = &t;

  // Generic numbering: node 0 is the start, path p >= 1 owns nodes
  // 1 + p(p-1)/2 ... p(p+1)/2, and the final node is d(d+1)/2 + 1.
  const std::size_t generic_final = static_cast<std::size_t>(d) * (d + 1) / 2 + 1;
  auto first_own_node = [](int p) { return 1 + static_cast<std::size_t>(p) * (p - 1) / 2; };

  std::vector<AutomatonGraph::Edge> edges;
  std::map<int, std::size_t> entry_node;  // node reached by the first link of each path
  for (const auto& [p, term] : by_path) {
    const std::size_t own = first_own_node(p);
    auto node = [&](int lambda) {  // node reached after `lambda + 1` links
      return lambda == p ? generic_final : own + static_cast<std::size_t>(lambda);
    };

    int first_lambda = 0;
    std::size_t from = 0;
    if (spec.merge_prefixes && p >= 2) {
      auto prev = by_path.find(p - 1);
      if (prev != by_path.end() && prev->second->ops.front() == term->ops.front()) {
        // Reuse the first link of path p-1; this path continues from its end.
        first_lambda = 1;
        from = entry_node.at(p - 1);
      }
    }
    entry_node[p] = first_lambda == 0 ? node(0) : from;

    for (int lambda = first_lambda; lambda <= p; ++lambda) {
      AutomatonGraph::Edge e{from, node(lambda), p, lambda, term->ops[static_cast<std::size_t>(lambda)],
                             lambda == p ? term->coefficient : 1.0};
      from = e.to;
      edges.push_back(std::move(e));
    }
  }

  // Compact away nodes that no link touches (absent or merged paths).
  std::vector<bool> used(generic_final + 1, false);
  used.front() = used.back() = true;
  for (const auto& e : edges) used[e.from] = used[e.to] = true;
  std::vector<std::size_t> renumber(used.size());
  std::size_t next = 0;
  for (std::size_t n = 0; n < used.size(); ++n)
    if (used[n]) renumber[n] = next++;
  for (auto& e : edges) {
    e.from = renumber[e.from];
    e.to = renumber[e.to];
  }

  AutomatonGraph g;
  g.d = d;
  g.node_count = next;
  g.edges = std::move(edges);
  return g;
}

MPO::MPO(std::size_t bond_dim, std::size_t n_sites)
    : bond_dim_(bond_dim), n_sites_(n_sites), w_(bond_dim * bond_dim) {
  if (bond_dim < 2) throw ValidationError("MPO bond dimension must be >= 2");
  if (n_sites < 1) throw ValidationError("MPO needs at least one site");
}

const std::optional<OperatorEntry>& MPO::at(std::size_t row, std::size_t col) const {
  if (row >= bond_dim_ || col >= bond_dim_) throw ShapeError("MPO entry index out of range");
  return w_[row * bond_dim_ + col];
}

void MPO::set(std::size_t row, std::size_t col, OperatorEntry entry) {
  if (row >= bond_dim_ || col >= bond_dim_) throw ShapeError("MPO entry index out of range");
  w_[row * bond_dim_ + col] = std::move(entry);
}

std::vector<std::optional<OperatorEntry>> MPO::left_boundary() const {
  return {w_.begin(), w_.begin() + static_cast<std::ptrdiff_t>(bond_dim_)};
}

std::vector<std::optional<OperatorEntry>> MPO::right_boundary() const {
  std::vector<std::optional<OperatorEntry>> col;
  for (std::size_t r = 0; r < bond_dim_; ++r) col.push_back(at(r, bond_dim_ - 1));
  return col;
}

MPO::SiteTensor MPO::site(std::size_t index) const {
  if (index >= n_sites_) throw ShapeError("MPO site index out of range");
  const bool first = index == 0;
  const bool last = index + 1 == n_sites_;
  SiteTensor s;
  s.rows = first ? 1 : bond_dim_;
  s.cols = last ? 1 : bond_dim_;
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c) {
      const auto& e = at(first ? 0 : r, last ? bond_dim_ - 1 : c);
      if (e) s.blocks.push_back({r, c, e->dense()});
    }
  return s;
}

MPO automaton_to_mpo(const AutomatonGraph& graph, std::size_t n_sites) {
  if (graph.node_count < 2) throw ValidationError("automaton needs at least two nodes");
  if (n_sites < static_cast<std::size_t>(graph.d) + 1)
    throw ValidationError("n_sites=" + std::to_string(n_sites) + " is smaller than d+1=" +
                          std::to_string(graph.d + 1));
  MPO mpo(graph.node_count, n_sites);
  for (const auto& e : graph.edges) {
    if (e.from >= graph.node_count || e.to >= graph.node_count)
      throw ValidationError("automaton link refers to a node out of range");
    if (mpo.at(e.from, e.to))
      throw ValidationError("two links connect nodes " + std::to_string(e.from) + " and " +
                            std::to_string(e.to));
    mpo.set(e.from, e.to, {e.op, e.coefficient});
  }
  mpo.set(0, 0, {ops::identity(), 1.0});
  mpo.set(graph.final_node(), graph.final_node(), {ops::identity(), 1.0});
  return mpo;
}

MPO build_mpo(const HamiltonianSpec& spec) {
  return automaton_to_mpo(build_automaton(spec), spec.n_sites);
}

namespace {

Eigen::MatrixXd to_eigen(const Tensor& op) {
  Eigen::MatrixXd m(2, 2);
  m << op(0, 0), op(0, 1), op(1, 0), op(1, 1);
  return m;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

Tensor mpo_to_dense(const MPO& mpo) {
  const std::size_t n = mpo.n_sites();
  if (n > kMaxDenseSites)
    throw SizeError("dense Hamiltonian refused for N=" + std::to_string(n) + " (limit " +
                    std::to_string(kMaxDenseSites) + ")");

  // partial[b]: operator on the sites processed so far, with open bond index b.
  auto first = mpo.site(0);
  std::vector<std::optional<Eigen::MatrixXd>> partial(first.cols);
  for (const auto& blk : first.blocks) partial[blk.col] = to_eigen(blk.op);

  for (std::size_t i = 1; i < n; ++i) {
    auto s = mpo.site(i);
    std::vector<std::optional<Eigen::MatrixXd>> next(s.cols);
    for (const auto& blk : s.blocks) {
      if (!partial[blk.row]) continue;
      Eigen::MatrixXd term = kron(*partial[blk.row], to_eigen(blk.op));
      if (next[blk.col])
        *next[blk.col] += term;
      else
        next[blk.col] = std::move(term);
    }
    partial = std::move(next);
  }

  const std::size_t dim = std::size_t{1} << n;
  Tensor out({dim, dim});
  if (partial[0]) {
    // Eigen is column-major; write row-major explicitly.
    const auto& h = *partial[0];
    auto data = out.data();
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c)
        data[r * dim + c] = h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return out;
}

}  // namespace phasemap
