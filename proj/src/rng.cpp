#include "rtv/rng.hpp"

#include <cmath>
#include <numbers>

#include "rtv/errors.hpp"

namespace rtv {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t key : path) s = mix64(s ^ mix64(key));
  return s;
}

RngStream RngStream::derive(std::uint64_t master,
                            std::initializer_list<std::uint64_t> path) {
  return RngStream(derive_seed(master, path));
}

int RngStream::uniform_int(int n) {
  if (n <= 0) throw ConfigInvalid("uniform_int: n must be positive");
  return static_cast<int>(uniform01() * n);
}

double RngStream::gaussian() {
  // Box-Muller, discarding the second variate so each call consumes a
  // fixed number of words.
  double u1 = uniform01();
  const double u2 = uniform01();
  if (u1 <= 0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Point2 RngStream::on_circle(double radius) {
  const double a = uniform(0.0, 2.0 * std::numbers::pi);
  return Point2(radius * std::cos(a), radius * std::sin(a));
}

std::vector<int> RngStream::sample_indices(int n, int k) {
  if (k < 0 || k > n) throw ConfigInvalid("sample_indices: k out of range");
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + uniform_int(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace rtv
