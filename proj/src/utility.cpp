#include "iterfunc/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

std::vector<double> quantity_grid(double lo, double hi, std::size_t panels) {
  if (!(lo < hi) || panels < 1)
    throw std::invalid_argument("quantity_grid: need lo < hi and panels >= 1");
  return linspace(lo, hi, panels + 1);
}

UtilityEstimate reconstruct_utility(const PriceSchedule& price,
                                    const QuantileSolution& lambda,
                                    const DistributionView& g,
                                    std::span<const double> q_grid) {
  if (q_grid.size() < 2)
    throw std::invalid_argument("reconstruct_utility: need >= 2 grid points");
  const double span = g.support_hi - g.support_lo;
  const double slack = 1e-9 * std::max(1.0, std::fabs(span));
  if (q_grid.front() < g.support_lo - slack ||
      q_grid.back() > g.support_hi + slack)
    throw std::domain_error("reconstruct_utility: grid outside cdf support");

  UtilityEstimate out;
  out.q_grid.assign(q_grid.begin(), q_grid.end());
  const std::size_t m = out.q_grid.size();
  out.u_prime.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double q = out.q_grid[i];
    const double a = std::clamp(g.cdf(q), 0.0, 1.0);
    out.u_prime[i] = price.tau * price.slope(q) - lambda.value(a);
  }
  out.u_values = cumulative_trapezoid(out.q_grid, out.u_prime);

  out.u_second.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == m ? i : i + 1;
    out.u_second[i] = (out.u_prime[hi] - out.u_prime[lo]) /
                      (out.q_grid[hi] - out.q_grid[lo]);
  }
  return out;
}

double type_density_from_lambda(const QuantileSolution& lambda, double alpha) {
  const std::size_t m = lambda.alpha.size();
  if (m < 2)
    throw std::invalid_argument("type_density_from_lambda: need >= 2 points");
  const auto it =
      std::lower_bound(lambda.alpha.begin(), lambda.alpha.end(), alpha);
  std::size_t j = static_cast<std::size_t>(it - lambda.alpha.begin());
  if (j == m) j = m - 1;
  if (j > 0 && alpha - lambda.alpha[j - 1] < lambda.alpha[j] - alpha) --j;
  const std::size_t lo = j == 0 ? 0 : j - 1;
  const std::size_t hi = j + 1 >= m ? m - 1 : j + 1;
  const double slope = (lambda.lambda[hi] - lambda.lambda[lo]) /
                       (lambda.alpha[hi] - lambda.alpha[lo]);
  // a flat or backward-bending stretch of the estimated quantile function
  // means locally concentrated types; report a huge density rather than a
  // sign flip
  if (!(slope > 1e-12)) return 1e12;
  return 1.0 / slope;
}

double second_derivative_utility(const PriceSchedule& price, double g_at_q,
                                 double f_eps, double q) {
  if (!(f_eps > 1e-6))
    throw std::domain_error("second_derivative_utility: type density vanishes");
  return price.tau * price.curvature(q) - g_at_q / f_eps;
}

namespace {

double socond_denominator(const PriceSchedule& price, double u_second,
                          double q) {
  if (!(q > 0.0))
    throw std::invalid_argument("elasticity: quantity must be positive");
  const double d = u_second - price.tau * price.curvature(q);
  if (!(d < 0.0))
    throw std::domain_error("elasticity: second-order condition violated");
  return q * d;
}

}  // namespace

double elasticity_level(const PriceSchedule& price, double u_second,
                        double q) {
  const double denom = socond_denominator(price, u_second, q);
  return price.tau * price.slope(q) / denom;
}

double elasticity_curvature(const PriceSchedule& price, double u_second,
                            double q) {
  const double denom = socond_denominator(price, u_second, q);
  const double p = price.tau * price.price(q);
  if (!(p > 0.0))
    throw std::domain_error(
        "elasticity_curvature: price must be positive for the log transform");
  return price.tau * price.slope(q) * (1.0 + std::log(p)) / denom;
}

double elasticity_convex(const PriceSchedule& price, double p0_slope,
                         double u_second, double q) {
  const double denom = socond_denominator(price, u_second, q);
  return (price.tau * price.slope(q) - p0_slope) / denom;
}

}  // namespace iterfunc
