#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "rtv/types.hpp"

namespace rtv {

/// Mixes a 64-bit value into a well-distributed hash (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Seed of the sub-stream identified by a key path under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Deterministic random stream. Streams derived from the same master
/// seed and key path produce identical sequences on every platform:
/// the generator is mt19937_64 and all floating-point draws are built
/// from raw 64-bit words, never from std:: distributions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  /// Stream for a named sub-experiment: seed = mix of master and path.
  static RngStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  int uniform_int(int n);

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double gaussian();

  /// Point at exactly `radius` from the origin, uniform in angle.
  Point2 on_circle(double radius);

  /// First k of 0..n-1 after a partial Fisher-Yates shuffle.
  std::vector<int> sample_indices(int n, int k);

 private:
  std::mt19937_64 gen_;
};

}  // namespace rtv
