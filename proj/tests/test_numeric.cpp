#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "iterfunc/numeric.hpp"

using namespace iterfunc;

TEST_CASE("normal cdf and pdf basics") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(10.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(normal_cdf(-10.0) < 1e-15);
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  // symmetry
  CHECK(normal_cdf(1.3) + normal_cdf(-1.3) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("inverse normal cdf against reference values") {
  // reference points computed with a 30-digit erfinv
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.9599639845400543).epsilon(1e-13));
  CHECK(inverse_normal_cdf(0.025) ==
        doctest::Approx(-1.9599639845400543).epsilon(1e-13));
  CHECK(inverse_normal_cdf(0.9) ==
        doctest::Approx(1.2815515655446004).epsilon(1e-13));
  CHECK(inverse_normal_cdf(0.99) ==
        doctest::Approx(2.326347874040841).epsilon(1e-13));
  CHECK(inverse_normal_cdf(1e-10) ==
        doctest::Approx(-6.361340902404057).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.3) ==
        doctest::Approx(-0.5244005127080408).epsilon(1e-13));
  CHECK_THROWS(inverse_normal_cdf(0.0));
  CHECK_THROWS(inverse_normal_cdf(1.0));
  CHECK_THROWS(inverse_normal_cdf(-0.2));
}

TEST_CASE("inverse normal cdf round-trips through the cdf") {
  for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-8}) {
    CHECK(normal_cdf(inverse_normal_cdf(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("linspace endpoints and spacing") {
  const auto g = linspace(0.25, 0.75, 11);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.25);
  CHECK(g.back() == 0.75);
  CHECK(g[5] == doctest::Approx(0.5).epsilon(1e-15));
  for (std::size_t i = 1; i < g.size(); ++i)
    CHECK(g[i] - g[i - 1] == doctest::Approx(0.05).epsilon(1e-12));
  const auto single = linspace(2.0, 2.0, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 2.0);
}

TEST_CASE("variance and stddev") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(grid_variance(v) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(sample_stddev(v) ==
        doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
  const std::vector<double> c = {7.0, 7.0, 7.0};
  CHECK(grid_variance(c) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("trapezoid rules are exact for linear integrands") {
  const auto x = linspace(0.0, 2.0, 21);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] + 1.0;
  CHECK(trapezoid(x, y) == doctest::Approx(8.0).epsilon(1e-13));
  const auto cum = cumulative_trapezoid(x, y);
  REQUIRE(cum.size() == x.size());
  CHECK(cum.front() == 0.0);
  CHECK(cum.back() == doctest::Approx(8.0).epsilon(1e-13));
  // interior value: integral of 3t+1 up to 1 is 2.5
  CHECK(cum[10] == doctest::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("cumulative trapezoid of x recovers x^2/2") {
  const auto x = linspace(0.0, 1.0, 101);
  const auto cum = cumulative_trapezoid(x, x);
  for (std::size_t i = 0; i < x.size(); i += 20)
    CHECK(cum[i] == doctest::Approx(0.5 * x[i] * x[i]).margin(5e-5));
}

TEST_CASE("invert_monotone finds the generalized inverse") {
  const auto f = [](double q) { return q * q; };
  CHECK(invert_monotone(f, 0.0, 1.0, 0.25, 1e-12) ==
        doctest::Approx(0.5).epsilon(1e-10));
  // derivative-assisted call agrees
  const auto df = [](double q) { return 2.0 * q; };
  CHECK(invert_monotone(f, 0.0, 1.0, 0.49, 1e-12, df) ==
        doctest::Approx(0.7).epsilon(1e-10));
  // targets outside the range clamp
  CHECK(invert_monotone(f, 0.0, 1.0, -0.5, 1e-12) == doctest::Approx(0.0));
  CHECK(invert_monotone(f, 0.0, 1.0, 2.0, 1e-12) == doctest::Approx(1.0));
}

TEST_CASE("invert_monotone on a flat step takes the smallest admissible point") {
  // f is 0 below 0.4, then rises; target 0 must return the interval's left end
  const auto f = [](double q) { return q < 0.4 ? 0.0 : q - 0.4; };
  CHECK(invert_monotone(f, 0.0, 1.0, 0.1, 1e-10) ==
        doctest::Approx(0.5).epsilon(1e-8));
  CHECK(invert_monotone(f, 0.0, 1.0, 0.0, 1e-10) ==
        doctest::Approx(0.0).margin(1e-8));
}

TEST_CASE("bisect_root basics") {
  CHECK(bisect_root([](double x) { return std::cos(x); }, 0.0, 2.0, 1e-12) ==
        doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));
  CHECK(bisect_root([](double x) { return x * x * x - 8.0; }, 0.0, 3.0,
                    1e-12) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("isotonic projection pools violators") {
  const std::vector<double> v = {3.0, 1.0, 2.0};
  const auto w = isotonic_nondecreasing(v);
  REQUIRE(w.size() == 3);
  CHECK(w[0] == doctest::Approx(2.0));
  CHECK(w[1] == doctest::Approx(2.0));
  CHECK(w[2] == doctest::Approx(2.0));

  const std::vector<double> inc = {1.0, 2.0, 5.0};
  const auto w2 = isotonic_nondecreasing(inc);
  for (std::size_t i = 0; i < 3; ++i) CHECK(w2[i] == inc[i]);

  const std::vector<double> v3 = {1.0, 3.0, 2.0, 4.0};
  const auto w3 = isotonic_nondecreasing(v3);
  CHECK(w3[0] == doctest::Approx(1.0));
  CHECK(w3[1] == doctest::Approx(2.5));
  CHECK(w3[2] == doctest::Approx(2.5));
  CHECK(w3[3] == doctest::Approx(4.0));
  for (std::size_t i = 1; i < w3.size(); ++i) CHECK(w3[i] >= w3[i - 1]);
}

TEST_CASE("linear interpolation with endpoint clamping") {
  LinearInterp f({0.0, 1.0, 2.0}, {0.0, 10.0, 0.0});
  CHECK(f(0.5) == doctest::Approx(5.0));
  CHECK(f(1.5) == doctest::Approx(5.0));
  CHECK(f(1.0) == doctest::Approx(10.0));
  CHECK(f(-3.0) == doctest::Approx(0.0));
  CHECK(f(9.0) == doctest::Approx(0.0));
}

TEST_CASE("parallel_for writes every slot exactly once") {
  std::vector<double> out(257, -1.0);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = 2.0 * i; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 2.0 * i);
}
