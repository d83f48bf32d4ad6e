#include "iterfunc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

SolverInputs make_solver_inputs(const DistributionView& g1,
                                const DistributionView& g2,
                                const PriceSchedule& p1,
                                const PriceSchedule& p2) {
  SolverInputs in;
  in.g1 = g1;
  in.g2 = g2;
  in.p1slope = p1.slope;
  in.p2slope = p2.slope;
  in.tau1 = p1.tau;
  in.tau2 = p2.tau;
  return in;
}

namespace {

BandwidthResult pick_bandwidth(const EstimationConfig& cfg, const Sample& s) {
  if (cfg.bandwidth.method == BandwidthChoice::fixed) {
    if (!(cfg.bandwidth.value > 0.0))
      throw std::invalid_argument("fixed bandwidth must be positive");
    return {cfg.bandwidth.value, false};
  }
  return cv_bandwidth(s.quantities);
}

double sample_percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double t = pos - static_cast<double>(i);
  return v[i] + t * (v[i + 1] - v[i]);
}

}  // namespace

PointEstimate run_point_estimate(const Sample& s1, const Sample& s2,
                                 const PriceSchedule& p1in,
                                 const PriceSchedule& p2in,
                                 const EstimationConfig& cfg,
                                 bool with_residual, bool with_elasticity) {
  cfg.validate();
  if (s1.size() < 10 || s2.size() < 10)
    throw std::invalid_argument(
        "run_point_estimate: need at least 10 observations per sample");

  // Money-utility scaling: period 2 is the numeraire; the period-1 scaling
  // comes from the ratio of marginal prices where a common type buys in
  // both periods, anchored at a zero purchase.
  PriceSchedule p1 = p1in, p2 = p2in;
  p2.tau = 1.0;
  p1.tau = identify_tau(p1, p2, 0.0);

  PointEstimate pe;
  pe.h1 = pick_bandwidth(cfg, s1);
  pe.h2 = pick_bandwidth(cfg, s2);
  SmoothedDistribution g1(s1.quantities, pe.h1.h);
  SmoothedDistribution g2(s2.quantities, pe.h2.h);
  const DistributionView v1 = g1.view(), v2 = g2.view();

  const std::size_t n_min = std::min(s1.size(), s2.size());
  pe.orientation =
      detect_orientation(v1, v2, p1, p2, p1.tau, p2.tau, cfg, n_min);

  const SolverInputs in = make_solver_inputs(v1, v2, p1, p2);
  pe.lambda = solve_lambda(pe.orientation, in, cfg, n_min, with_residual);

  const double q_max =
      *std::max_element(s2.quantities.begin(), s2.quantities.end());
  pe.q_grid = quantity_grid(0.0, q_max,
                            static_cast<std::size_t>(cfg.quadrature_points));
  pe.utility = reconstruct_utility(p2, pe.lambda, v2, pe.q_grid);

  pe.q_lo_reliable = sample_percentile(s2.quantities, 0.05);
  pe.q_hi_reliable = sample_percentile(s2.quantities, 0.95);
  if (with_elasticity)
    pe.elasticity = elasticity_profile(p2, pe.lambda, g2, pe.q_grid,
                                       pe.q_lo_reliable, pe.q_hi_reliable);
  return pe;
}

ElasticityProfile elasticity_profile(const PriceSchedule& price,
                                     const QuantileSolution& lambda,
                                     const SmoothedDistribution& gd,
                                     std::span<const double> q_grid,
                                     double q_lo_reliable,
                                     double q_hi_reliable) {
  ElasticityProfile out;
  out.q.assign(q_grid.begin(), q_grid.end());
  const std::size_t m = out.q.size();
  out.level.assign(m, std::numeric_limits<double>::quiet_NaN());
  out.curvature.assign(m, std::numeric_limits<double>::quiet_NaN());
  out.convex.assign(m, std::numeric_limits<double>::quiet_NaN());
  out.reliable.assign(m, 0);
  const double p0_slope = price.tau * price.slope(0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double q = out.q[i];
    if (!(q > 0.0)) continue;
    try {
      const double a = std::clamp(gd.cdf(q), 0.0, 1.0);
      const double f_eps = type_density_from_lambda(lambda, a);
      const double u2 =
          second_derivative_utility(price, gd.density(q), f_eps, q);
      out.level[i] = elasticity_level(price, u2, q);
      out.curvature[i] = elasticity_curvature(price, u2, q);
      out.convex[i] = elasticity_convex(price, p0_slope, u2, q);
      out.reliable[i] = q >= q_lo_reliable && q <= q_hi_reliable &&
                        std::isfinite(out.level[i]) &&
                        std::isfinite(out.curvature[i]) &&
                        std::isfinite(out.convex[i]);
    } catch (const std::exception&) {
      // outside the second-order-condition region; left as NaN, unreliable
    }
  }
  return out;
}

}  // namespace iterfunc
