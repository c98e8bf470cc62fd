#include <doctest.h>

#include <cmath>
#include <set>

#include "rtv/errors.hpp"
#include "rtv/rng.hpp"

using namespace rtv;

TEST_SUITE_BEGIN("rng");

TEST_CASE("equal seeds and paths give equal streams") {
  RngStream a = RngStream::derive(42, {1, 2, 3});
  RngStream b = RngStream::derive(42, {1, 2, 3});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different paths decorrelate streams") {
  RngStream a = RngStream::derive(42, {1, 2, 3});
  RngStream b = RngStream::derive(42, {1, 2, 4});
  RngStream c = RngStream::derive(43, {1, 2, 3});
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next_u64();
    equal_ab += x == b.next_u64();
    equal_ac += x == c.next_u64();
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniform01 stays in [0,1) and fills the range") {
  RngStream rng(7);
  double lo = 1, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform01();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("gaussian moments match a standard normal") {
  RngStream rng(11);
  const int n = 50000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("on_circle lands exactly on the radius") {
  RngStream rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Point2 p = rng.on_circle(20.0);
    CHECK(p.norm() == doctest::Approx(20.0).epsilon(1e-12));
  }
  CHECK(rng.on_circle(0.0).norm() == 0.0);
}

TEST_CASE("on_circle covers directions uniformly") {
  RngStream rng(5);
  int quadrant[4] = {0, 0, 0, 0};
  const int n = 8000;
  for (int i = 0; i < n; ++i) {
    const Point2 p = rng.on_circle(1.0);
    quadrant[(p.x() >= 0) + 2 * (p.y() >= 0)]++;
  }
  for (const int q : quadrant) CHECK(std::abs(q - n / 4) < n / 20);
}

TEST_CASE("uniform_int bounds and errors") {
  RngStream rng(9);
  std::set<int> seen;
  for (int i = 0; i < 1000; ++i) {
    const int x = rng.uniform_int(6);
    CHECK(x >= 0);
    CHECK(x < 6);
    seen.insert(x);
  }
  CHECK(seen.size() == 6);
  CHECK_THROWS_AS(rng.uniform_int(0), ConfigInvalid);
}

TEST_CASE("sample_indices draws distinct indices") {
  RngStream rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<int> idx = rng.sample_indices(6, 3);
    CHECK(idx.size() == 3);
    const std::set<int> unique(idx.begin(), idx.end());
    CHECK(unique.size() == 3);
    for (const int i : idx) {
      CHECK(i >= 0);
      CHECK(i < 6);
    }
  }
  CHECK(rng.sample_indices(4, 0).empty());
  CHECK(rng.sample_indices(4, 4).size() == 4);
  CHECK_THROWS_AS(rng.sample_indices(3, 4), ConfigInvalid);
}

TEST_CASE("every subset is reachable") {
  RngStream rng(17);
  std::set<std::set<int>> subsets;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::vector<int> idx = rng.sample_indices(4, 2);
    subsets.insert(std::set<int>(idx.begin(), idx.end()));
  }
  CHECK(subsets.size() == 6);  // C(4,2)
}

TEST_SUITE_END();
