#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "iterfunc/kernel.hpp"
#include "iterfunc/pipeline.hpp"
#include "iterfunc/rng.hpp"
#include "iterfunc/simulation.hpp"
#include "iterfunc/solver.hpp"

using namespace iterfunc;

namespace {

DistributionView d1_g1() {
  return analytic_distribution(
      [](double q) { return std::clamp(q * q * q, 0.0, 1.0); }, 0.0, 1.0,
      [](double a) { return std::cbrt(a); });
}

DistributionView d1_g2() {
  return analytic_distribution(
      [](double q) {
        return std::clamp(std::pow(std::max(q, 0.0), 1.5), 0.0, 1.0);
      },
      0.0, 1.0, [](double a) { return std::pow(a, 2.0 / 3.0); });
}

SolverInputs d1_inputs() {
  return make_solver_inputs(d1_g1(), d1_g2(), design1_p1(), design1_p2());
}

Orientation d1_orientation() {
  Orientation ori;
  ori.tau1 = 2.0;
  ori.tau2 = 1.0;
  ori.segments.push_back({0.0, 1.0, 2});
  return ori;
}

}  // namespace

TEST_CASE("r_eval reproduces the closed-form increment") {
  const SolverInputs in = d1_inputs();
  // base 2: r(a) = q^2 - q at q = a^{2/3}
  CHECK(r_eval(in, 2, 0.25) ==
        doctest::Approx(-0.23936013175519072).epsilon(1e-12));
  const double a = 0.6;
  const double q = std::pow(a, 2.0 / 3.0);
  CHECK(r_eval(in, 2, a) == doctest::Approx(q * q - q).epsilon(1e-12));
  // flipped base: r(a) = q - q^2 at q = a^{1/3}
  const double qb = std::cbrt(a);
  CHECK(r_eval(in, 1, a) == doctest::Approx(qb - qb * qb).epsilon(1e-12));
  CHECK_THROWS_AS(r_eval(in, 3, 0.5), std::invalid_argument);
}

TEST_CASE("analytic first-design solve recovers the type quantile") {
  EstimationConfig cfg;
  const SolverInputs in = d1_inputs();
  const QuantileSolution sol = solve_lambda(d1_orientation(), in, cfg, 2000);

  REQUIRE(sol.alpha.size() == static_cast<std::size_t>(cfg.grid_points));
  double sup = 0.0;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i)
    sup = std::max(sup,
                   std::fabs(sol.lambda[i] - std::pow(sol.alpha[i], 2.0 / 3.0)));
  CHECK(sup < 1.5e-6);
  CHECK(sol.monotone);
  CHECK_FALSE(sol.isotonized);
  CHECK(sol.residual_sup < 2e-6);
  CHECK(sol.iterations_used >= 5);
  CHECK(sol.iterations_used <= cfg.iteration_cap(2000));
  REQUIRE(sol.segments.size() == 1);
  CHECK(sol.segments[0].seg.base == 2);
  // exact distributions get no boundary guards
  CHECK(sol.segments[0].q_floor == 0.0);
}

TEST_CASE("interpolation, origin anchoring, and tail behavior of value()") {
  EstimationConfig cfg;
  const QuantileSolution sol =
      solve_lambda(d1_orientation(), d1_inputs(), cfg, 2000);
  CHECK(sol.value(0.5) == doctest::Approx(std::pow(0.5, 2.0 / 3.0)).margin(1e-5));
  CHECK(sol.value(0.517) ==
        doctest::Approx(std::pow(0.517, 2.0 / 3.0)).margin(1e-5));
  // below the grid the value decays linearly through the origin
  CHECK(sol.value(0.0) == doctest::Approx(0.0).margin(1e-12));
  const double at_lo = sol.value(cfg.alpha_lo);
  CHECK(sol.value(0.5 * cfg.alpha_lo) ==
        doctest::Approx(0.5 * at_lo).epsilon(1e-9));
  // above the grid it freezes at the last value
  CHECK(sol.value(0.9999) == doctest::Approx(sol.value(cfg.alpha_hi)));
}

TEST_CASE("solution is stable under grid refinement") {
  EstimationConfig coarse, fine;
  coarse.grid_points = 99;
  fine.grid_points = 399;
  const SolverInputs in = d1_inputs();
  const QuantileSolution a = solve_lambda(d1_orientation(), in, coarse, 2000);
  const QuantileSolution b = solve_lambda(d1_orientation(), in, fine, 2000);
  for (double x : {0.1, 0.3, 0.5, 0.7, 0.9})
    CHECK(a.value(x) == doctest::Approx(b.value(x)).margin(1e-5));
}

TEST_CASE("residual_check recomputes the stored diagnostic") {
  EstimationConfig cfg;
  const SolverInputs in = d1_inputs();
  const QuantileSolution sol = solve_lambda(d1_orientation(), in, cfg, 2000);
  CHECK(residual_check(sol, in) == doctest::Approx(sol.residual_sup).epsilon(1e-12));
}

TEST_CASE("two-segment analytic solve stitches continuously at the crossing") {
  EstimationConfig cfg;
  const PriceSchedule p1 = design2_p1();
  const PriceSchedule p2 = design2_p2();
  const auto g1 = analytic_distribution(
      [p1](double q) {
        const double e = 2.0 * q + 2.0 * p1.slope(q) - 2.0;
        return std::pow(std::clamp(e, 0.0, 1.0), 1.5);
      },
      0.0, 1.0);
  const auto g2 = d1_g2();
  const Orientation ori = detect_orientation(g1, g2, p1, p2, 2.0, 1.0, cfg, 2000);
  REQUIRE(ori.segments.size() == 2);
  const SolverInputs in = make_solver_inputs(g1, g2, p1, p2);
  const QuantileSolution sol = solve_lambda(ori, in, cfg, 2000);

  double sup = 0.0;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i)
    sup = std::max(sup,
                   std::fabs(sol.lambda[i] - std::pow(sol.alpha[i], 2.0 / 3.0)));
  // linear contraction on the lower branch leaves a regularization floor far
  // above the first design's doubly-exponential accuracy
  CHECK(sup < 2e-3);
  CHECK(sol.residual_sup < 2e-3);

  // no jump where the segments meet
  const double ac = ori.crossing_alpha[0];
  std::size_t j = 1;
  while (j < sol.alpha.size() && sol.alpha[j] < ac) ++j;
  CHECK(std::fabs(sol.lambda[j] - sol.lambda[j - 1]) < 0.02);
}

TEST_CASE("tighter iterate tolerance only sharpens the analytic solve") {
  EstimationConfig loose, tight;
  tight.beta_var_tol = 1e-14;
  const SolverInputs in = d1_inputs();
  auto sup_err = [&](const QuantileSolution& s) {
    double sup = 0.0;
    for (std::size_t i = 0; i < s.alpha.size(); ++i)
      sup = std::max(sup,
                     std::fabs(s.lambda[i] - std::pow(s.alpha[i], 2.0 / 3.0)));
    return sup;
  };
  const double e_loose =
      sup_err(solve_lambda(d1_orientation(), in, loose, 2000));
  const double e_tight =
      sup_err(solve_lambda(d1_orientation(), in, tight, 2000));
  CHECK(e_tight <= e_loose + 1e-12);
}

TEST_CASE("isotonize flag projects the estimate onto nondecreasing curves") {
  RngStream rng(1, stream_mc_rep, 0);
  const auto [s1, s2] = gen_design1(400, rng);
  const PointEstimate raw = run_point_estimate(
      s1, s2, design1_p1(), design1_p2(), EstimationConfig{}, false, false);
  EstimationConfig iso_cfg;
  iso_cfg.isotonize_lambda = true;
  const PointEstimate iso = run_point_estimate(
      s1, s2, design1_p1(), design1_p2(), iso_cfg, false, false);
  CHECK(iso.lambda.isotonized);
  CHECK_FALSE(raw.lambda.isotonized);
  for (std::size_t i = 1; i < iso.lambda.lambda.size(); ++i)
    CHECK(iso.lambda.lambda[i] >= iso.lambda.lambda[i - 1] - 1e-12);
  if (raw.lambda.monotone) {
    CHECK(iso.lambda.isotonize_distance == doctest::Approx(0.0).margin(1e-12));
  } else {
    CHECK(iso.lambda.isotonize_distance > 0.0);
  }
}

TEST_CASE("truncation bound follows the geometric tail formula") {
  CHECK(truncation_bound(1.0, 0.5, 2.0 / 3.0, 3) ==
        doctest::Approx(0.42560359597982883).epsilon(1e-12));
  // linear in the constant, geometric in the order
  CHECK(truncation_bound(2.5, 0.5, 2.0 / 3.0, 3) ==
        doctest::Approx(2.5 * 0.42560359597982883).epsilon(1e-12));
  const double r = truncation_bound(1.0, 0.5, 2.0 / 3.0, 7) /
                   truncation_bound(1.0, 0.5, 2.0 / 3.0, 6);
  CHECK(r == doctest::Approx(std::pow(0.5, 2.0 / 3.0)).epsilon(1e-12));
  // larger N can only shrink the bound
  double prev = truncation_bound(1.0, 0.5, 2.0 / 3.0, 1);
  for (int n = 2; n <= 12; ++n) {
    const double cur = truncation_bound(1.0, 0.5, 2.0 / 3.0, n);
    CHECK(cur < prev);
    prev = cur;
  }
}
