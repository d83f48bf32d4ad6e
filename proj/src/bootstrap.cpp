#include "iterfunc/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace iterfunc {

std::vector<double> draw_multipliers(std::size_t n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("draw_multipliers: n >= 1");
  std::vector<double> xi(n);
  for (auto& x : xi) x = rng.exponential();
  return xi;
}

SmoothedDistribution bootstrap_cdf(const Sample& s, std::span<const double> xi,
                                   double bandwidth) {
  if (xi.size() != s.size())
    throw std::invalid_argument("bootstrap_cdf: multiplier count mismatch");
  double mean = 0.0;
  for (double x : xi) mean += x;
  mean /= static_cast<double>(xi.size());
  if (!(mean > 0.0))
    throw std::invalid_argument("bootstrap_cdf: multipliers must average > 0");
  // the weighted constructor rescales weights to sum n, i.e. divides by the
  // multiplier mean
  return SmoothedDistribution(s.quantities,
                              std::vector<double>(xi.begin(), xi.end()),
                              bandwidth);
}

namespace {

double empirical_quantile(std::vector<double>& v, double p) {
  // nearest-rank on the sorted replicate values
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  std::size_t k = static_cast<std::size_t>(std::ceil(p * m));
  if (k < 1) k = 1;
  if (k > v.size()) k = v.size();
  return v[k - 1];
}

}  // namespace

BootstrapBands bootstrap_pipeline(const Sample& s1, const Sample& s2,
                                  const PriceSchedule& p1in,
                                  const PriceSchedule& p2in,
                                  const EstimationConfig& cfg,
                                  BootstrapTarget target,
                                  const PointEstimate& point, double level) {
  cfg.validate();
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_pipeline: level in (0,1)");
  if (cfg.bootstrap_reps < 100)
    throw std::invalid_argument("bootstrap_pipeline: need >= 100 replicates");

  PriceSchedule p1 = p1in, p2 = p2in;
  p1.tau = point.orientation.tau1;
  p2.tau = point.orientation.tau2;

  BootstrapBands bands;
  bands.level = level;
  bands.reps = cfg.bootstrap_reps;
  switch (target) {
    case BootstrapTarget::lambda:
      bands.grid = point.lambda.alpha;
      bands.point_estimate = point.lambda.lambda;
      break;
    case BootstrapTarget::utility:
      bands.grid = point.q_grid;
      bands.point_estimate = point.utility.u_values;
      break;
    case BootstrapTarget::elasticity:
      bands.grid = point.q_grid;
      bands.point_estimate = point.elasticity.level;
      break;
  }
  const std::size_t m = bands.grid.size();
  if (m == 0 || bands.point_estimate.size() != m)
    throw std::invalid_argument(
        "bootstrap_pipeline: point estimate lacks the target curve");

  const std::size_t n_min = std::min(s1.size(), s2.size());
  const int B = cfg.bootstrap_reps;
  std::vector<std::vector<double>> curves;
  curves.reserve(static_cast<std::size_t>(B));
  int failures = 0;
  std::string first_error;

  for (int b = 0; b < B; ++b) {
    try {
      RngStream r1(cfg.seed, stream_boot_sample1, static_cast<std::uint64_t>(b));
      RngStream r2(cfg.seed, stream_boot_sample2, static_cast<std::uint64_t>(b));
      const std::vector<double> xi1 = draw_multipliers(s1.size(), r1);
      const std::vector<double> xi2 = draw_multipliers(s2.size(), r2);
      SmoothedDistribution g1 = bootstrap_cdf(s1, xi1, point.h1.h);
      SmoothedDistribution g2 = bootstrap_cdf(s2, xi2, point.h2.h);
      const SolverInputs in = make_solver_inputs(g1.view(), g2.view(), p1, p2);
      const QuantileSolution sol =
          solve_lambda(point.orientation, in, cfg, n_min, false);

      std::vector<double> curve;
      if (target == BootstrapTarget::lambda) {
        curve = sol.lambda;
      } else if (target == BootstrapTarget::utility) {
        curve = reconstruct_utility(p2, sol, g2.view(), point.q_grid).u_values;
      } else {
        curve = elasticity_profile(p2, sol, g2, point.q_grid,
                                   point.q_lo_reliable, point.q_hi_reliable)
                    .level;
      }
      if (curve.size() != m) throw std::runtime_error("curve length mismatch");
      bool finite = true;
      for (double v : curve)
        if (!std::isfinite(v)) {
          finite = false;
          break;
        }
      // elasticity curves may be NaN outside the admissible region; only
      // the band grid points that are finite in the point estimate count
      if (!finite && target != BootstrapTarget::elasticity)
        throw std::runtime_error("non-finite replicate curve");
      curves.push_back(std::move(curve));
    } catch (const std::exception& e) {
      ++failures;
      if (first_error.empty()) first_error = e.what();
    }
  }

  bands.failures = failures;
  if (failures * 10 > B)
    throw std::runtime_error(
        "bootstrap_pipeline: " + std::to_string(failures) + " of " +
        std::to_string(B) + " replicates failed (first: " + first_error + ")");

  const double p_lo = (1.0 - level) / 2.0;
  const double p_hi = (1.0 + level) / 2.0;
  bands.lo.resize(m);
  bands.hi.resize(m);
  std::vector<double> col;
  for (std::size_t j = 0; j < m; ++j) {
    col.clear();
    for (const auto& c : curves)
      if (std::isfinite(c[j])) col.push_back(c[j]);
    if (col.empty()) {
      bands.lo[j] = bands.hi[j] = bands.point_estimate[j];
      continue;
    }
    bands.lo[j] = empirical_quantile(col, p_lo);
    bands.hi[j] = empirical_quantile(col, p_hi);
  }
  return bands;
}

}  // namespace iterfunc
