#include <doctest.h>

#include <cmath>

#include "netate/rng.hpp"

using namespace netate;

TEST_CASE("identical seed and stream reproduce the sequence") {
  Pcg32 a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());
}

TEST_CASE("distinct streams from one seed diverge") {
  Pcg32 a(42, 0), b(42, 1);
  int differing = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u32() != b.next_u32()) ++differing;
  CHECK(differing > 60);
}

TEST_CASE("uniform doubles stay in [0,1) with a sane mean") {
  Pcg32 rng(9, 3);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 20000 - 0.5) < 0.01);
}

TEST_CASE("normal draws have unit scale") {
  Pcg32 rng(11, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    double x = rng.next_normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("zero-scale t draw collapses to the scaled location") {
  Pcg32 rng(5, 5);
  CHECK(rng.next_scaled_t3(0.8, 2.0, 0.0) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(rng.next_scaled_t3(1.8, 1.0, 0.0) == doctest::Approx(1.8).epsilon(1e-15));
}

TEST_CASE("t3 draws center on the scaled location") {
  Pcg32 rng(13, 2);
  double sum = 0.0;
  const int n = 60000;
  for (int i = 0; i < n; ++i) sum += rng.next_scaled_t3(0.8, 1.0, 0.5);
  // t3 has mean equal to its location; sd of the sample mean ~ 0.003.
  CHECK(std::abs(sum / n - 0.8) < 0.02);
}
