#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "iterfunc/kernel.hpp"
#include "iterfunc/numeric.hpp"
#include "iterfunc/rng.hpp"

using namespace iterfunc;

TEST_CASE("single observation smooths to a shifted normal cdf") {
  SmoothedDistribution g({0.5}, 0.1);
  CHECK(g.cdf(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.cdf(0.6) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-10));
  CHECK(g.cdf(0.5 - 0.9) == doctest::Approx(0.0).margin(1e-12));
  CHECK(g.cdf(0.5 + 0.9) == doctest::Approx(1.0).margin(1e-12));
}

TEST_CASE("smoothed cdf is monotone and spans 0 to 1") {
  RngStream rng(3, stream_sim_eps, 0);
  std::vector<double> data(400);
  for (auto& q : data) q = rng.uniform();
  SmoothedDistribution g(data, 0.05);
  double prev = -1.0;
  for (double q = -0.5; q <= 1.5; q += 0.01) {
    const double c = g.cdf(q);
    CHECK(c >= prev - 1e-13);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
    prev = c;
  }
  CHECK(g.cdf(g.support_lo()) < 0.05);
  CHECK(g.cdf(g.support_hi()) > 0.99);
}

TEST_CASE("smoothed cdf tracks the uniform law on a large draw") {
  RngStream rng(17, stream_sim_eps, 2);
  std::vector<double> data(10000);
  for (auto& q : data) q = rng.uniform();
  SmoothedDistribution g(data, 0.02);
  double sup = 0.0;
  for (double q = 0.05; q <= 0.951; q += 0.005)
    sup = std::max(sup, std::fabs(g.cdf(q) - q));
  CHECK(sup < 0.02);
}

TEST_CASE("quantile is the generalized inverse of the cdf") {
  RngStream rng(9, stream_sim_eps, 1);
  std::vector<double> data(500);
  for (auto& q : data) q = rng.uniform() * 2.0;
  SmoothedDistribution g(data, 0.08);
  for (double a : {0.05, 0.2, 0.5, 0.8, 0.95}) {
    const double q = g.quantile(a);
    CHECK(g.cdf(q) == doctest::Approx(a).margin(1e-8));
  }
  for (double q : {0.3, 0.9, 1.6}) {
    CHECK(g.quantile(g.cdf(q)) == doctest::Approx(q).margin(1e-7));
  }
  // out-of-range targets clamp to the support
  CHECK(g.quantile(1e-14) == doctest::Approx(g.support_lo()).margin(1e-9));
  CHECK(g.quantile(1.0) == doctest::Approx(g.support_hi()).margin(1e-9));
}

TEST_CASE("hinted quantile matches the unhinted answer") {
  RngStream rng(21, stream_sim_eps, 4);
  std::vector<double> data(300);
  for (auto& q : data) q = rng.uniform();
  SmoothedDistribution g(data, 0.05);
  for (double a : {0.1, 0.33, 0.5, 0.77, 0.9}) {
    const double q0 = g.quantile(a);
    // good hint, sloppy hint, and a hint that fails to bracket
    CHECK(g.quantile_in(a, q0 - 0.01, q0 + 0.01) ==
          doctest::Approx(q0).margin(1e-9));
    CHECK(g.quantile_in(a, 0.0, 1.0) == doctest::Approx(q0).margin(1e-9));
    CHECK(g.quantile_in(a, q0 + 0.2, q0 + 0.3) ==
          doctest::Approx(q0).margin(1e-9));
  }
}

TEST_CASE("density integrates to one and matches the cdf slope") {
  RngStream rng(13, stream_sim_eps, 3);
  std::vector<double> data(600);
  for (auto& q : data) q = 0.5 + 0.2 * rng.normal(0.0, 1.0);
  SmoothedDistribution g(data, 0.07);
  const auto grid = linspace(g.support_lo() - 0.5, g.support_hi() + 0.5, 2001);
  std::vector<double> dens(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) dens[i] = g.density(grid[i]);
  CHECK(trapezoid(grid, dens) == doctest::Approx(1.0).margin(1e-6));
  // finite differences of the cdf reproduce the density
  for (double q : {0.2, 0.5, 0.8}) {
    const double fd = (g.cdf(q + 5e-6) - g.cdf(q - 5e-6)) / 1e-5;
    CHECK(g.density(q) == doctest::Approx(fd).margin(1e-5));
  }
  // and of the density, its derivative
  for (double q : {0.3, 0.6}) {
    const double fd = (g.density(q + 5e-6) - g.density(q - 5e-6)) / 1e-5;
    CHECK(g.density_derivative(q) == doctest::Approx(fd).margin(1e-4));
  }
}

TEST_CASE("scale equivariance of the smoothed cdf") {
  std::vector<double> data = {0.1, 0.4, 0.45, 0.7, 0.9, 1.3};
  const double c = 3.5;
  std::vector<double> scaled;
  for (double q : data) scaled.push_back(c * q);
  SmoothedDistribution g(data, 0.1);
  SmoothedDistribution gs(scaled, c * 0.1);
  for (double q : {0.2, 0.5, 0.8, 1.1})
    CHECK(gs.cdf(c * q) == doctest::Approx(g.cdf(q)).epsilon(1e-12));
}

TEST_CASE("weights default to the unweighted fit") {
  std::vector<double> data = {0.2, 0.5, 0.8, 1.0};
  SmoothedDistribution plain(data, 0.1);
  SmoothedDistribution weighted(data, {1.0, 1.0, 1.0, 1.0}, 0.1);
  for (double q : {0.1, 0.45, 0.75, 1.2})
    CHECK(weighted.cdf(q) == doctest::Approx(plain.cdf(q)).epsilon(1e-13));
}

TEST_CASE("unequal weights tilt the cdf toward the heavy observations") {
  std::vector<double> data = {0.2, 0.8};
  SmoothedDistribution tilted(data, {3.0, 1.0}, 0.05);
  // 3/4 of the normalized mass sits near 0.2
  CHECK(tilted.cdf(0.5) == doctest::Approx(0.75).margin(1e-6));
}

TEST_CASE("nonnegative domain floors the quantile range") {
  std::vector<double> data = {0.01, 0.02, 0.05, 0.3};
  SmoothedDistribution g(data, 0.1);
  CHECK(g.support_lo() == 0.0);
  CHECK(g.quantile(1e-12) >= 0.0);
  SmoothedDistribution free_domain(data, 0.1, /*nonneg_domain=*/false);
  CHECK(free_domain.support_lo() < 0.0);
}

TEST_CASE("analytic distribution view inverts a cube-law cdf") {
  const auto view = analytic_distribution(
      [](double q) { return std::clamp(q * q * q, 0.0, 1.0); }, 0.0, 1.0);
  CHECK(view.bandwidth == 0.0);
  CHECK(view.cdf(0.5) == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(view.quantile(0.125) == doctest::Approx(0.5).margin(1e-9));
  CHECK(view.quantile_hinted(0.125, 0.4, 0.6) ==
        doctest::Approx(0.5).margin(1e-9));
  // closed-form inverse is used verbatim when supplied
  const auto direct = analytic_distribution(
      [](double q) { return std::clamp(q * q * q, 0.0, 1.0); }, 0.0, 1.0,
      [](double a) { return std::cbrt(a); });
  CHECK(direct.quantile(0.125) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("smoothed view carries its bandwidth and support") {
  std::vector<double> data = {0.2, 0.4, 0.9};
  SmoothedDistribution g(data, 0.06);
  const DistributionView v = g.view();
  CHECK(v.bandwidth == doctest::Approx(0.06));
  CHECK(v.support_lo == g.support_lo());
  CHECK(v.support_hi == g.support_hi());
  CHECK(v.cdf(0.4) == doctest::Approx(g.cdf(0.4)).epsilon(1e-14));
  CHECK(v.quantile(0.5) == doctest::Approx(g.quantile(0.5)).epsilon(1e-12));
}

TEST_CASE("cross-validated bandwidth lands at a plausible scale") {
  RngStream rng(31, stream_sim_eps, 7);
  std::vector<double> data(1000);
  for (auto& q : data) {
    const double e = rng.uniform();
    q = std::sqrt(e);  // design-style smooth law on [0,1]
  }
  const BandwidthResult r = cv_bandwidth(data);
  CHECK_FALSE(r.fallback);
  CHECK(r.h > 0.005);
  CHECK(r.h < 0.15);
}

TEST_CASE("bandwidth selection falls back on near-degenerate data") {
  std::vector<double> data(50, 1.0);
  for (int i = 0; i < 5; ++i) data[i] = 2.0;
  const BandwidthResult r = cv_bandwidth(data);
  CHECK(r.fallback);
  CHECK(r.h > 0.0);
}
