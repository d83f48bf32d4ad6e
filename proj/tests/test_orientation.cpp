#include <cmath>
#include <vector>

#include "doctest.h"
#include "iterfunc/kernel.hpp"
#include "iterfunc/orientation.hpp"
#include "iterfunc/price.hpp"
#include "iterfunc/sample.hpp"
#include "iterfunc/simulation.hpp"

using namespace iterfunc;

namespace {

// closed-form pair from the first design: G1 = q^3, G2 = q^{3/2} on [0,1]
DistributionView cube_view() {
  return analytic_distribution(
      [](double q) { return std::clamp(q * q * q, 0.0, 1.0); }, 0.0, 1.0,
      [](double a) { return std::cbrt(a); });
}

DistributionView sqrt32_view() {
  return analytic_distribution(
      [](double q) { return std::clamp(std::pow(std::max(q, 0.0), 1.5), 0.0, 1.0); },
      0.0, 1.0, [](double a) { return std::pow(a, 2.0 / 3.0); });
}

}  // namespace

TEST_CASE("polynomial price schedule evaluates coefficients") {
  const std::vector<double> th = {2.0, -0.5, 0.0};
  CHECK(poly_price(th, 1.0) == doctest::Approx(1.5));
  CHECK(poly_price(th, 0.5) == doctest::Approx(2.0 * 0.5 - 0.5 * 0.25));
  CHECK(poly_slope(th, 1.0) == doctest::Approx(1.0));
  CHECK(poly_slope(th, 0.0) == doctest::Approx(2.0));
  CHECK(poly_curvature(th, 0.7) == doctest::Approx(-1.0));

  const PriceSchedule p = PriceSchedule::polynomial(th);
  CHECK(p.is_polynomial());
  CHECK(p.price(0.0) == doctest::Approx(0.0));  // zero purchase costs nothing
  CHECK(p.price(0.8) == doctest::Approx(poly_price(th, 0.8)));
  CHECK(p.slope(0.8) == doctest::Approx(poly_slope(th, 0.8)));
  CHECK(p.curvature(0.8) == doctest::Approx(-1.0));
}

TEST_CASE("closed-form schedule passes its callables through") {
  const PriceSchedule p = PriceSchedule::closed_form(
      [](double q) { return q * q; }, [](double q) { return 2.0 * q; },
      [](double) { return 2.0; });
  CHECK_FALSE(p.is_polynomial());
  CHECK(p.price(3.0) == doctest::Approx(9.0));
  CHECK(p.slope(3.0) == doctest::Approx(6.0));
  CHECK(p.curvature(3.0) == doctest::Approx(2.0));
}

TEST_CASE("design schedules carry their scalings and derivatives") {
  const PriceSchedule p1 = design1_p1();
  const PriceSchedule p2 = design1_p2();
  CHECK(p1.tau == doctest::Approx(2.0));
  CHECK(p2.tau == doctest::Approx(1.0));
  CHECK(p1.slope(0.0) == doctest::Approx(1.0));
  CHECK(p2.slope(0.0) == doctest::Approx(2.0));
  // marginal prices at an interior point
  CHECK(p1.slope(0.5) == doctest::Approx(1.0 - 0.5 + 0.125));
  CHECK(p2.slope(0.5) == doctest::Approx(1.5));
  // level is the integral of the slope
  CHECK(p2.price(1.0) == doctest::Approx(1.5));

  const PriceSchedule q1 = design2_p1();
  CHECK(q1.slope(0.5) == doctest::Approx(0.75).epsilon(1e-10));  // B(1/2)=1/2
  // integral of the binomial tail over [0,1] is exactly 1/2
  CHECK(q1.price(1.0) == doctest::Approx(0.75).margin(1e-5));
}

TEST_CASE("tau identification from marginal price ratios") {
  CHECK(identify_tau(design1_p1(), design1_p2(), 0.0) == doctest::Approx(2.0));
  CHECK(identify_tau(design2_p1(), design2_p2(), 0.5) ==
        doctest::Approx(2.0).epsilon(1e-10));
  const PriceSchedule flat = PriceSchedule::closed_form(
      [](double) { return 1.0; }, [](double) { return 0.0; },
      [](double) { return 0.0; });
  CHECK_THROWS_AS(identify_tau(flat, design1_p2(), 0.3), std::runtime_error);
}

TEST_CASE("beta step composes the quantile and the other cdf") {
  const auto base = sqrt32_view();   // dominated sample: larger cdf
  const auto other = cube_view();
  // beta(a) = G1(G2^{-1}(a)) = a^2
  CHECK(beta_step(base, other, 0.25) == doctest::Approx(0.0625).epsilon(1e-10));
  CHECK(beta_step(base, other, 0.5) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(iterate_beta(base, other, 0.5, 0) == doctest::Approx(0.5));
  CHECK(iterate_beta(base, other, 0.5, 1) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(iterate_beta(base, other, 0.5, 3) ==
        doctest::Approx(std::pow(0.5, 8.0)).epsilon(1e-7));
  CHECK_THROWS_AS(iterate_beta(base, other, 0.5, -1), std::invalid_argument);
}

TEST_CASE("beta iterates contract toward zero from the dominated side") {
  const auto base = sqrt32_view();
  const auto other = cube_view();
  for (double a : {0.1, 0.4, 0.7, 0.95}) {
    double prev = a;
    for (int k = 1; k <= 6; ++k) {
      const double cur = iterate_beta(base, other, a, k);
      CHECK(cur < prev);
      prev = cur;
    }
    CHECK(prev < 1e-3);  // six rounds of squaring
  }
}

TEST_CASE("the two directed maps are mutually inverse") {
  const auto g2 = sqrt32_view();
  const auto g1 = cube_view();
  for (double a : {0.2, 0.5, 0.8}) {
    const double down = beta_step(g2, g1, a);   // a^2
    CHECK(beta_step(g1, g2, down) == doctest::Approx(a).margin(1e-8));
    const double up = beta_step(g1, g2, a);     // sqrt(a)
    CHECK(beta_step(g2, g1, up) == doctest::Approx(a).margin(1e-8));
  }
}

TEST_CASE("orientation on the first design is a single segment with base 2") {
  EstimationConfig cfg;
  const Orientation ori =
      detect_orientation(cube_view(), sqrt32_view(), design1_p1(),
                         design1_p2(), 2.0, 1.0, cfg, 1000);
  REQUIRE(ori.single_segment());
  CHECK(ori.base() == 2);
  CHECK(ori.tau1 == doctest::Approx(2.0));
  CHECK(ori.crossing_alpha.empty());
  CHECK(ori.segment_at(0.3).base == 2);
}

TEST_CASE("orientation on the second design splits at the schedule crossing") {
  EstimationConfig cfg;
  // closed-form second-design cdfs: G1 = F(2q + B(q) - 1), G2 = F(q)
  const PriceSchedule p1 = design2_p1();
  const PriceSchedule p2 = design2_p2();
  const auto g1 = analytic_distribution(
      [p1](double q) {
        // type solving the first-order condition: e = 2q + B(q) - 1, with
        // the tail recovered from the marginal price via B = 2 p1' - 1
        const double e = 2.0 * q + 2.0 * p1.slope(q) - 2.0;
        return std::pow(std::clamp(e, 0.0, 1.0), 1.5);
      },
      0.0, 1.0);
  const auto g2 = sqrt32_view();
  const Orientation ori =
      detect_orientation(g1, g2, p1, p2, 2.0, 1.0, cfg, 1000);
  REQUIRE(ori.segments.size() == 2);
  REQUIRE(ori.crossing_q.size() == 1);
  CHECK(ori.crossing_q[0] == doctest::Approx(0.5).margin(1e-6));
  CHECK(ori.crossing_alpha[0] ==
        doctest::Approx(std::pow(0.5, 1.5)).margin(1e-4));
  CHECK(ori.segments[0].base == 1);
  CHECK(ori.segments[1].base == 2);
  CHECK(ori.segment_at(0.1).base == 1);
  CHECK(ori.segment_at(0.9).base == 2);
  // segment boundaries partition [0,1]
  CHECK(ori.segments[0].alpha_lo == doctest::Approx(0.0));
  CHECK(ori.segments[0].alpha_hi == doctest::Approx(ori.crossing_alpha[0]));
  CHECK(ori.segments[1].alpha_hi == doctest::Approx(1.0));
}

TEST_CASE("indistinguishable samples are rejected as uninformative") {
  EstimationConfig cfg;
  const auto g = sqrt32_view();
  CHECK_THROWS_AS(detect_orientation(g, sqrt32_view(), design1_p1(),
                                     design1_p2(), 2.0, 1.0, cfg, 10000),
                  std::runtime_error);
}
