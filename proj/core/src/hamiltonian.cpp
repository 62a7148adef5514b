#include "phasemap/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>
#include <string>

#include "phasemap/error.hpp"
#include "phasemap/util.hpp"

namespace phasemap {

using nlohmann::json;

void HamiltonianSpec::validate() const {
  if (d < 0) throw ValidationError("interaction distance d must be >= 0");
  if (terms.empty()) throw ValidationError("Hamiltonian has no terms");
  if (n_sites < static_cast<std::size_t>(d) + 1)
    throw ValidationError("n_sites=" + std::to_string(n_sites) + " is smaller than d+1=" +
                          std::to_string(d + 1));
  std::set<int> paths;
  for (const auto& t : terms) {
    if (t.p < 0 || t.p > d)
      throw ValidationError("term with p=" + std::to_string(t.p) + " outside 0..d=" +
                            std::to_string(d));
    if (t.ops.size() != static_cast<std::size_t>(t.p) + 1)
      throw ValidationError("term with p=" + std::to_string(t.p) + " needs " +
                            std::to_string(t.p + 1) + " operators, got " +
                            std::to_string(t.ops.size()));
    if (!std::isfinite(t.coefficient))
      throw ValidationError("term with p=" + std::to_string(t.p) + " has a non-finite coefficient");
    if (!paths.insert(t.p).second)
      throw ValidationError("more than one term with p=" + std::to_string(t.p) +
                            "; each path carries a single product term");
  }
  if (!paths.contains(d))
    throw ValidationError("no term reaches the interaction distance d=" + std::to_string(d));
}

namespace {

json to_json(const HamiltonianSpec& spec) {
  json terms = json::array();
  for (const auto& t : spec.terms) {
    json labels = json::array();
    for (const auto& op : t.ops) labels.push_back(op.label);
    terms.push_back({{"p", t.p}, {"coefficient", t.coefficient}, {"ops", labels}});
  }
  return {{"d", spec.d},
          {"n_sites", spec.n_sites},
          {"description", spec.description},
          {"merge_prefixes", spec.merge_prefixes},
          {"terms", terms}};
}

}  // namespace

std::string to_text(const HamiltonianSpec& spec) { return to_json(spec).dump(2); }

HamiltonianSpec spec_from_text(std::string_view text) {
  HamiltonianSpec spec;
  try {
    const json j = json::parse(text);
    spec.d = j.at("d").get<int>();
    spec.n_sites = j.at("n_sites").get<std::size_t>();
    spec.description = j.value("description", std::string{});
    spec.merge_prefixes = j.value("merge_prefixes", false);
    for (const auto& jt : j.at("terms")) {
      InteractionTerm term;
      term.p = jt.at("p").get<int>();
      term.coefficient = jt.at("coefficient").get<double>();
      for (const auto& label : jt.at("ops")) term.ops.push_back(ops::from_label(label.get<std::string>()));
      spec.terms.push_back(std::move(term));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed Hamiltonian spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

namespace {

// +1 if a and b commute, -1 if they anticommute, 0 otherwise.
int commutation_sign(const SiteOperator& a, const SiteOperator& b) {
  const Tensor ab = contract(a.matrix, {1}, b.matrix, {0});
  const Tensor ba = contract(b.matrix, {1}, a.matrix, {0});
  if (max_abs_diff(ab, ba) == 0.0) return 1;
  if (max_abs_diff(ab, -1.0 * ba) == 0.0) return -1;
  return 0;
}

int commutation_sign(const ProductOperator& q, std::span<const SiteOperator> ops, std::size_t at) {
  int sign = 1;
  for (std::size_t k = 0; k < ops.size(); ++k) sign *= commutation_sign(q.ops[at + k], ops[k]);
  return sign;
}

}  // namespace

std::vector<ProductOperator> product_symmetries(const HamiltonianSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_sites;
  struct Candidate {
    ProductOperator op;
    std::vector<bool> bits;  // (x bits, z bits) over the chain
  };
  std::vector<Candidate> candidates;
  for (const char* pauli : {"Sz", "Sx"})
    for (int pattern = 0; pattern < 3; ++pattern) {  // all, even, odd sites
      Candidate c;
      c.op.name = std::string("prod ") + pauli + (pattern == 0 ? " (all)" : pattern == 1 ? " (even)" : " (odd)");
      c.bits.assign(2 * n, false);
      for (std::size_t j = 0; j < n; ++j) {
        const bool on = pattern == 0 || (j % 2 == 0) == (pattern == 1);
        c.op.ops.push_back(on ? ops::from_label(pauli) : ops::identity());
        if (on) c.bits[(pauli[1] == 'x' ? 0 : n) + j] = true;
      }
      candidates.push_back(std::move(c));
    }

  std::vector<ProductOperator> chosen;
  std::vector<std::vector<bool>> basis;  // row-reduced bits of chosen operators
  for (auto& c : candidates) {
    bool symmetric = true;
    for (const auto& term : spec.terms) {
      for (std::size_t j = 0; j + static_cast<std::size_t>(term.p) < n && symmetric; ++j)
        symmetric = commutation_sign(c.op, term.ops, j) == 1;
      if (!symmetric) break;
    }
    if (!symmetric) continue;
    bool commutes = true;
    for (const auto& q : chosen) commutes = commutes && commutation_sign(c.op, q.ops, 0) == 1;
    if (!commutes) continue;
    // Skip products of operators already chosen (GF(2) elimination).
    std::vector<bool> v = c.bits;
    for (const auto& row : basis) {
      const auto pivot = static_cast<std::size_t>(std::find(row.begin(), row.end(), true) - row.begin());
      if (v[pivot])
        for (std::size_t b = 0; b < v.size(); ++b) v[b] = v[b] != row[b];
    }
    if (std::find(v.begin(), v.end(), true) == v.end()) continue;
    basis.push_back(std::move(v));
    chosen.push_back(std::move(c.op));
  }
  return chosen;
}

std::string digest(const HamiltonianSpec& spec) {
  json j = to_json(spec);
  j.erase("description");
  return to_hex(fnv1a64(j.dump()));
}

}  // namespace phasemap
