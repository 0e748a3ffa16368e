#include <doctest.h>

#include <cmath>

#include "mlr/rng.hpp"

using mlr::Rng;

TEST_CASE("same seed and stream reproduce the sequence") {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams decorrelate") {
  Rng a(42, 0), b(42, 1), c(43, 0);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const uint64_t va = a.next_u64();
    equal_ab += va == b.next_u64();
    equal_ac += va == c.next_u64();
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("uniform stays inside its interval") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-0.25, 0.5);
    CHECK(v >= -0.25);
    CHECK(v < 0.5);
  }
}

TEST_CASE("box-muller gaussians have the right first moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.gaussian();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // 3 standard errors: se(mean) = 1/sqrt(n), se(var) ~ sqrt(2/n)
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}
