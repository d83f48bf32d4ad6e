#include <cmath>
#include <vector>

#include "doctest.h"
#include "iterfunc/rng.hpp"

using namespace iterfunc;

TEST_CASE("uniform draws stay strictly inside (0,1) and match moments") {
  RngStream rng(7, stream_sim_eps, 0);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0, mn = 1.0, mx = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
    mn = std::min(mn, u);
    mx = std::max(mx, u);
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(0.5).margin(2e-3));
  CHECK(var == doctest::Approx(1.0 / 12.0).margin(2e-3));
  // a million draws should probe both tails
  CHECK(mn < 1e-4);
  CHECK(mx > 1.0 - 1e-4);
}

TEST_CASE("exponential multipliers have unit mean and variance") {
  RngStream rng(11, stream_boot_sample1, 3);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = rng.exponential();
    REQUIRE(e > 0.0);
    sum += e;
    sumsq += e * e;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(1.0).margin(5e-3));
  CHECK(sumsq / n - mean * mean == doctest::Approx(1.0).margin(2e-2));
}

TEST_CASE("normal draws match requested mean and sd") {
  RngStream rng(5, stream_sim_price_noise, 1);
  const int n = 400000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(2.0, 0.05);
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(2.0).margin(5e-4));
  CHECK(std::sqrt(sumsq / n - mean * mean) ==
        doctest::Approx(0.05).margin(5e-4));
}

TEST_CASE("streams are deterministic and addressed by purpose and index") {
  RngStream a(42, stream_mc_rep, 17);
  RngStream b(42, stream_mc_rep, 17);
  for (int i = 0; i < 64; ++i) REQUIRE(a.raw() == b.raw());

  // a different index or purpose must decorrelate immediately
  RngStream c(42, stream_mc_rep, 18);
  RngStream d(42, stream_boot_sample2, 17);
  RngStream e(43, stream_mc_rep, 17);
  int same_c = 0, same_d = 0, same_e = 0;
  RngStream a2(42, stream_mc_rep, 17);
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t r = a2.raw();
    same_c += r == c.raw();
    same_d += r == d.raw();
    same_e += r == e.raw();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
  CHECK(same_e == 0);
}

TEST_CASE("splitmix64 reference values") {
  // known first outputs for state 0 of the standard constants
  std::uint64_t s = 0;
  CHECK(splitmix64(s) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(s) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(s) == 0x06c45d188009454fULL);
}
