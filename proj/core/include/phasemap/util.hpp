#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace phasemap {

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t value);

std::uint64_t splitmix64(std::uint64_t x);

/// Independent per-item seed derived from a global seed and an item index.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index);

/// Small deterministic generator (splitmix64 stream). Unlike the standard
/// distributions its output is identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is handed out
/// through a shared counter; each index is processed exactly once. The first
/// exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double value);

}  // namespace phasemap
