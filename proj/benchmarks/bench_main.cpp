#include <benchmark/benchmark.h>

#include <random>

#include "phasemap/dmrg.hpp"
#include "phasemap/eigensolver.hpp"
#include "phasemap/kernel.hpp"
#include "phasemap/models.hpp"
#include "phasemap/spectral.hpp"
#include "phasemap/tensor.hpp"

using namespace phasemap;

namespace {

Tensor random_tensor(Tensor::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = u(rng);
  return t;
}

void BM_Contract(benchmark::State& state) {
  const auto chi = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({chi, 2, chi}, 1), b = random_tensor({chi, 2, chi}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(contract(a, {2}, b, {0}));
}
BENCHMARK(BM_Contract)->Arg(16)->Arg(32)->Arg(64);

void BM_SvdTruncate(benchmark::State& state) {
  const auto chi = static_cast<std::size_t>(state.range(0));
  const Tensor t = random_tensor({chi, 2, 2, chi}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(svd_truncate(t, 2, chi, 1e-14));
}
BENCHMARK(BM_SvdTruncate)->Arg(16)->Arg(32)->Arg(64);

void BM_Lanczos(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = u(rng);
  m = (m + m.transpose()).eval();
  const LinearMap apply = [&m](std::span<const double> x, std::span<double> y) {
    Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) =
        m * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  };
  const std::vector<double> v0(static_cast<std::size_t>(n), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(lowest_eigenpair(apply, static_cast<std::size_t>(n), v0, 1e-10, 100000));
}
BENCHMARK(BM_Lanczos)->Arg(256)->Arg(1024);

void BM_DmrgGroundState(benchmark::State& state) {
  DmrgConfig config;
  config.chi = static_cast<std::size_t>(state.range(1));
  const HamiltonianSpec spec = annni_spec(0.4, 0.9, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ground_state(spec, config).energy);
}
BENCHMARK(BM_DmrgGroundState)->Args({20, 16})->Args({20, 32})->Unit(benchmark::kMillisecond);

void BM_Kernel(benchmark::State& state) {
  std::vector<MPS> states;
  for (std::size_t i = 0; i < static_cast<std::size_t>(state.range(0)); ++i) states.push_back(random_mps(20, 16, i));
  for (auto _ : state) benchmark::DoNotOptimize(compute_kernel(states));
}
BENCHMARK(BM_Kernel)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Kmeans(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(state.range(0), 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(x, 4, 0));
}
BENCHMARK(BM_Kmeans)->Arg(225)->Arg(900);

}  // namespace

BENCHMARK_MAIN();
