#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "phasemap/dmrg.hpp"
#include "phasemap/error.hpp"
#include "phasemap/kernel.hpp"
#include "phasemap/models.hpp"
#include "support/oracles.hpp"

using namespace phasemap;

namespace {

MPS x_state(std::size_t n, double sign) {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<std::array<double, 2>> amps(n, {r, sign * r});
  return product_state(amps);
}

std::vector<MPS> random_states(std::size_t count, std::size_t n, std::uint64_t seed) {
  std::vector<MPS> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_mps(n, 4, seed + i));
  return out;
}

}  // namespace

TEST(Kernel, SingleStateIsOne) {
  const std::vector<MPS> states = {random_mps(6, 4, 1)};
  const KernelMatrix k = compute_kernel(states);
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(k.entries(0, 0), 1.0);
}

TEST(Kernel, OrthogonalStatesGiveIdentity) {
  const std::vector<MPS> states = {x_state(5, 1.0), x_state(5, -1.0)};
  const KernelMatrix k = compute_kernel(states);
  EXPECT_EQ(k.entries(0, 0), 1.0);
  EXPECT_EQ(k.entries(1, 1), 1.0);
  EXPECT_NEAR(k.entries(0, 1), 0.0, 1e-15);
  EXPECT_EQ(k.entries(0, 1), k.entries(1, 0));
}

TEST(Kernel, GroundStateFidelityMatchesExactDiagonalization) {
  const std::size_t n = 8;
  const auto a = oracle::lowest(oracle::annni(0.2, 0.5, n));
  const auto b = oracle::lowest(oracle::annni(0.2, 1.5, n));
  const double reference = std::pow(a.vector.dot(b.vector), 2);
  EXPECT_LT(reference, 0.5);
  DmrgConfig config;
  config.chi = 16;
  const std::vector<MPS> states = {ground_state(annni_spec(0.2, 0.5, n), config).state,
                                   ground_state(annni_spec(0.2, 1.5, n), config).state};
  EXPECT_NEAR(compute_kernel(states).entries(0, 1), reference, 1e-6);
}

TEST(Kernel, PropertiesOnRandomStates) {
  const auto states = random_states(12, 7, 10);
  const KernelMatrix k = compute_kernel(states, 3);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(k.entries(i, i), 1.0);
    for (std::size_t j = 0; j < 12; ++j) {
      EXPECT_EQ(k.entries(i, j), k.entries(j, i));
      EXPECT_GE(k.entries(i, j), 0.0);
      EXPECT_LE(k.entries(i, j), 1.0);
      if (i != j) EXPECT_NEAR(k.entries(i, j), std::pow(overlap(states[i], states[j]), 2), 1e-14);
    }
  }
  // Serial and threaded results agree bit for bit.
  EXPECT_EQ(compute_kernel(states, 1).entries, k.entries);
}

TEST(Kernel, DistanceSatisfiesTriangleInequality) {
  const auto states = random_states(10, 6, 30);
  const Eigen::MatrixXd d = kernel_distance(compute_kernel(states));
  for (Eigen::Index i = 0; i < 10; ++i) {
    EXPECT_EQ(d(i, i), 0.0);
    for (Eigen::Index j = 0; j < 10; ++j)
      for (Eigen::Index l = 0; l < 10; ++l) EXPECT_LE(d(i, l), d(i, j) + d(j, l) + 1e-12);
  }
  KernelMatrix zero = make_kernel(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_NEAR(kernel_distance(zero)(0, 1), std::sqrt(2.0), 1e-15);
}

TEST(Kernel, ReorderingStatesPermutesKernel) {
  auto states = random_states(6, 5, 50);
  const KernelMatrix k = compute_kernel(states);
  std::reverse(states.begin(), states.end());
  const KernelMatrix r = compute_kernel(states);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) EXPECT_NEAR(r.entries(i, j), k.entries(5 - i, 5 - j), 1e-14);
}

TEST(Kernel, CsvRoundTripIsExact) {
  const KernelMatrix k = compute_kernel(random_states(7, 5, 70));
  std::stringstream a;
  write_kernel_csv(a, k);
  const std::string text = a.str();
  EXPECT_EQ(text.substr(0, 2), "7\n");
  std::stringstream in(text);
  const KernelMatrix back = read_kernel_csv(in);
  EXPECT_EQ(back.entries, k.entries);
  std::stringstream b;
  write_kernel_csv(b, back);
  EXPECT_EQ(b.str(), text);
}

TEST(Kernel, MalformedCsvRejected) {
  for (const char* bad : {"", "2\n1,0\n", "2\n1,0.5\n0.4,1\n", "2\n1,2\n2,1\n", "x\n", "1\nabc\n"}) {
    std::stringstream in(bad);
    EXPECT_THROW(read_kernel_csv(in), ValidationError) << bad;
  }
}

TEST(Kernel, UnnormalizedStateNamed) {
  auto states = random_states(4, 5, 80);
  states[2].sites[0] *= 1.1;
  try {
    compute_kernel(states);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
  auto mixed = random_states(2, 5, 90);
  mixed.push_back(random_mps(6, 4, 1));
  EXPECT_THROW(compute_kernel(mixed), ValidationError);
}

TEST(Kernel, MakeKernelValidatesAndClamps) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0 + 1e-12, -1e-12, -1e-12, 1.0;
  const KernelMatrix k = make_kernel(m);
  EXPECT_EQ(k.entries(0, 0), 1.0);
  EXPECT_EQ(k.entries(0, 1), 0.0);
  m << 1.0, 0.3, 0.4, 1.0;
  EXPECT_THROW(make_kernel(m), ValidationError);
  m << 0.9, 0.3, 0.3, 1.0;
  EXPECT_THROW(make_kernel(m), ValidationError);
  m << 1.0, 1.5, 1.5, 1.0;
  EXPECT_THROW(make_kernel(m), ValidationError);
}

TEST(Kernel, ManifestRoundTrip) {
  KernelMatrix k = make_kernel(Eigen::MatrixXd::Identity(3, 3));
  k.meta.model = "annni";
  k.meta.grid = "k=0:1:3";
  k.meta.grid_digest = "abc";
  k.meta.n_sites = 20;
  k.meta.chi = 16;
  k.meta.seed = 5;
  k.meta.energy_tol = 1e-8;
  const KernelMeta back = meta_from_manifest(kernel_manifest(k));
  EXPECT_EQ(back.model, "annni");
  EXPECT_EQ(back.grid, "k=0:1:3");
  EXPECT_EQ(back.grid_digest, "abc");
  EXPECT_EQ(back.n_sites, 20u);
  EXPECT_EQ(back.chi, 16u);
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.energy_tol, 1e-8);
}
