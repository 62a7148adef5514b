#include <gtest/gtest.h>

#include <cmath>

#include "phasemap/automaton.hpp"
#include "phasemap/error.hpp"
#include "phasemap/models.hpp"
#include "support/dense.hpp"
#include "support/oracles.hpp"

using namespace phasemap;
using testing_support::to_matrix;

TEST(Models, ChainsShorterThanThreeRejected) {
  EXPECT_THROW(annni_spec(0.1, 0.1, 2), ValidationError);
  EXPECT_THROW(cluster_ising_spec(0.1, 0.1, 1), ValidationError);
  try {
    annni_spec(0.1, 0.1, 2);
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("N=2"), std::string::npos);
  }
}

TEST(Grid, ThirtyByThirty) {
  const std::vector<AxisRange> axes = {{"k", 0.0, 1.0, 30}, {"h", 0.0, 2.0, 30}};
  const ParameterGrid g = make_grid(axes);
  ASSERT_EQ(g.size(), 900u);
  EXPECT_EQ(g.dimension(), 2u);
  EXPECT_EQ(g.points.front().coords, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(g.points.back().coords, (std::vector<double>{1.0, 2.0}));
  // Last axis varies fastest.
  EXPECT_EQ(g.points[1].coords[0], 0.0);
  EXPECT_NEAR(g.points[1].coords[1], 2.0 / 29.0, 1e-15);
  EXPECT_NEAR(g.points[30].coords[0], 1.0 / 29.0, 1e-15);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.points[i].index, i);
}

TEST(Grid, SinglePointAxisUsesMinimum) {
  const std::vector<AxisRange> axes = {{"k", 0.4, 0.4, 1}, {"h", 0.9, 3.0, 1}};
  const ParameterGrid g = make_grid(axes);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.points[0].coords, (std::vector<double>{0.4, 0.9}));
}

TEST(Grid, InclusiveLinspace) {
  const std::vector<AxisRange> axes = {{"x", -1.0, 1.0, 5}};
  const ParameterGrid g = make_grid(axes);
  const double expected[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  ASSERT_EQ(g.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(g.points[i].coords[0], expected[i]);
}

TEST(Grid, RejectsBadAxes) {
  const std::vector<AxisRange> zero = {{"k", 0.0, 1.0, 0}};
  EXPECT_THROW(make_grid(zero), ValidationError);
  const std::vector<AxisRange> reversed = {{"k", 1.0, 0.0, 3}};
  EXPECT_THROW(make_grid(reversed), ValidationError);
  EXPECT_THROW(make_grid(std::vector<AxisRange>{}), ValidationError);
  EXPECT_THROW(sample_uniform(std::vector<AxisRange>{{"k", 0.0, 1.0, 1}}, 0, 1), ValidationError);
}

TEST(Grid, ParseAndFormat) {
  const auto axes = parse_grid("k=0:1:30,h=0:2:15");
  ASSERT_EQ(axes.size(), 2u);
  EXPECT_EQ(axes[0].name, "k");
  EXPECT_EQ(axes[1].max, 2.0);
  EXPECT_EQ(axes[1].count, 15u);
  EXPECT_EQ(parse_grid(format_grid(axes))[1].count, 15u);
  EXPECT_EQ(format_grid(parse_grid("h2=-1.6:1.6:4")), format_grid(parse_grid(format_grid(parse_grid("h2=-1.6:1.6:4")))));
  for (const char* bad : {"k", "k=0:1", "k=0:1:x", "=0:1:3", "k=0:1:2.5", "k=0:1:0", "k=a:1:3"})
    EXPECT_THROW(parse_grid(bad), ValidationError) << bad;
}

TEST(Grid, UniformSamplesAreDeterministicAndInside) {
  const std::vector<AxisRange> axes = {{"h1", 0.0, 1.6, 1}, {"h2", -1.6, 1.6, 1}};
  const ParameterGrid a = sample_uniform(axes, 200, 42);
  const ParameterGrid b = sample_uniform(axes, 200, 42);
  const ParameterGrid c = sample_uniform(axes, 200, 43);
  ASSERT_EQ(a.size(), 200u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.points[i].coords, b.points[i].coords);
    differs = differs || a.points[i].coords != c.points[i].coords;
    EXPECT_GE(a.points[i].coords[0], 0.0);
    EXPECT_LT(a.points[i].coords[0], 1.6);
    EXPECT_GE(a.points[i].coords[1], -1.6);
    EXPECT_LT(a.points[i].coords[1], 1.6);
  }
  EXPECT_TRUE(differs);
}

TEST(Models, ZeroFieldAnnniIsClassical) {
  // At h = 0 every term is diagonal in the x basis, so H commutes with each Sx_j.
  for (std::size_t n : {3u, 6u, 9u}) {
    const Eigen::MatrixXd h = to_matrix(mpo_to_dense(build_mpo(annni_spec(0.7, 0.0, n))));
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::MatrixXd x = oracle::site_product(n, {{j, oracle::pauli_x()}});
      EXPECT_LT((h * x - x * h).norm(), 1e-12);
    }
  }
}

TEST(Models, ZeroFieldGroundEnergyMatchesEnumeration) {
  for (std::size_t n = 3; n <= 12; n += 3)
    for (double k : {0.0, 0.3, 0.5, 0.8}) {
      const Eigen::MatrixXd h = to_matrix(mpo_to_dense(build_mpo(annni_spec(k, 0.0, n))));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
      EXPECT_NEAR(es.eigenvalues()(0), oracle::annni_classical_minimum(k, n), 1e-10) << "N=" << n << " k=" << k;
    }
}

TEST(Models, BuiltinsAndAxes) {
  const ParameterizedModel annni = builtin_model("annni");
  EXPECT_EQ(annni.axis_names, (std::vector<std::string>{"k", "h"}));
  const double params[] = {0.4, 0.9};
  EXPECT_EQ(digest(annni(params, 8)), digest(annni_spec(0.4, 0.9, 8)));
  const double one[] = {0.4};
  EXPECT_THROW(annni(one, 8), ValidationError);
  EXPECT_EQ(builtin_model("cluster-ising").axis_names, (std::vector<std::string>{"h1", "h2"}));
  EXPECT_THROW(builtin_model("heisenberg"), ValidationError);
  EXPECT_EQ(default_axes("annni", 15).size(), 2u);
  EXPECT_EQ(default_axes("cluster-ising", 15)[1].min, -1.6);
}

TEST(Models, ModelFileScalesParameterizedTerms) {
  const char* text = R"({
    "d": 2, "axes": ["k", "h"],
    "terms": [
      {"p": 0, "coefficient": -1.0, "ops": ["Sz"], "param": "h"},
      {"p": 1, "coefficient": -1.0, "ops": ["Sx", "Sx"]},
      {"p": 2, "coefficient": 1.0, "ops": ["Sx", "I", "Sx"], "param": "k"}
    ]})";
  const ParameterizedModel m = model_from_text(text, "file-annni");
  EXPECT_EQ(m.axis_names, (std::vector<std::string>{"k", "h"}));
  const double params[] = {0.35, 1.2};
  const HamiltonianSpec s = m(params, 7);
  EXPECT_EQ(digest(s), digest(annni_spec(0.35, 1.2, 7)));

  EXPECT_THROW(model_from_text(R"({"d": 0, "terms": [{"p": 0, "ops": ["Sz"]}]})"), ValidationError);
  EXPECT_THROW(model_from_text(R"({"d": 0, "axes": ["a"], "terms": [{"p": 0, "ops": ["Sz"], "param": "b"}]})"),
               ValidationError);
  EXPECT_THROW(model_from_text("{"), ValidationError);
}

TEST(Symmetries, AnnniHasParity) {
  const auto syms = product_symmetries(annni_spec(0.4, 0.9, 6));
  ASSERT_EQ(syms.size(), 1u);
  for (const auto& op : syms[0].ops) EXPECT_EQ(op.label, "Sz");
}

TEST(Symmetries, DependOnTermStructureNotCoefficients) {
  // A zero field still names Sz in the spec, so prod Sx is not reported.
  const auto zero = product_symmetries(annni_spec(0.4, 0.0, 6));
  const auto finite = product_symmetries(annni_spec(0.4, 0.9, 6));
  ASSERT_EQ(zero.size(), finite.size());
  EXPECT_EQ(zero[0].name, finite[0].name);
}

TEST(Symmetries, ClusterIsingAtZeroFieldsHasTwoZ2) {
  const auto syms = product_symmetries(cluster_ising_spec(0.0, 0.0, 7));
  EXPECT_EQ(syms.size(), 2u);
  for (const auto& s : syms) {
    const HamiltonianSpec spec = cluster_ising_spec(0.0, 0.0, 7);
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(1, 1);
    for (const auto& op : s.ops) q = oracle::kron(q, to_matrix(op.matrix));
    const Eigen::MatrixXd h = oracle::cluster_ising(0.0, 0.0, 7);
    EXPECT_LT((h * q - q * h).norm(), 1e-12) << s.name;
  }
}

TEST(Symmetries, EverySymmetryCommutesWithH) {
  for (double h1 : {0.0, 0.5})
    for (double h2 : {0.0, -0.7}) {
      const std::size_t n = 6;
      const auto syms = product_symmetries(cluster_ising_spec(h1, h2, n));
      const Eigen::MatrixXd h = oracle::cluster_ising(h1, h2, n);
      for (const auto& s : syms) {
        Eigen::MatrixXd q = Eigen::MatrixXd::Identity(1, 1);
        for (const auto& op : s.ops) q = oracle::kron(q, to_matrix(op.matrix));
        EXPECT_LT((h * q - q * h).norm(), 1e-12) << s.name;
      }
    }
}
