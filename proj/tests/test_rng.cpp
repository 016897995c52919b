#include <doctest.h>

#include <cstdint>
#include <vector>

#include "blesim/rng.hpp"

using blesim::RngStream;

TEST_CASE("identical seed and stream replay the same sequence") {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different stream ids diverge immediately") {
  RngStream a(42, 0);
  RngStream b(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("uniform_int handles degenerate and faulty ranges") {
  RngStream r(1, 0);
  for (int i = 0; i < 10; ++i) CHECK(r.uniform_int(5, 5) == 5);
  CHECK_THROWS_AS((void)r.uniform_int(3, 2), std::invalid_argument);
}

TEST_CASE("uniform_int stays inside the closed range") {
  RngStream r(123, 4);
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t v = r.uniform_int(-3, 9);
    CHECK(v >= -3);
    CHECK(v <= 9);
  }
}

TEST_CASE("uniform01 lies in [0,1) with a sane mean") {
  RngStream r(9, 9);
  double sum = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double v = r.uniform01();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    sum += v;
  }
  // Mean of n uniforms has sd ~ 1/sqrt(12 n) ~ 0.0029; 5 sd margin.
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("uniform_int is unbiased across buckets (chi-squared)") {
  RngStream r(2026, 1);
  const int buckets = 16;
  const int n = 16000;
  std::vector<int> counts(buckets, 0);
  for (int i = 0; i < n; ++i) ++counts[r.uniform_int(0, buckets - 1)];
  const double expected = static_cast<double>(n) / buckets;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 15 degrees of freedom; 37.70 is the 0.1% critical value.
  CHECK(chi2 < 37.70);
}
