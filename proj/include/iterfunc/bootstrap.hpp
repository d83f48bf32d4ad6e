#pragma once

#include <span>
#include <vector>

#include "iterfunc/pipeline.hpp"
#include "iterfunc/rng.hpp"

namespace iterfunc {

//! Pointwise percentile band around a point estimate.
struct BootstrapBands {
  std::vector<double> grid;
  std::vector<double> point_estimate;
  std::vector<double> lo, hi;
  double level = 0.90;
  int reps = 0;
  int failures = 0;
};

enum class BootstrapTarget { lambda, utility, elasticity };

//! n independent standard-exponential multipliers (mean 1, variance 1).
std::vector<double> draw_multipliers(std::size_t n, RngStream& rng);

//! Weighted smoothed CDF with weights xi_i / xi_bar; identical to the
//! unweighted fit when all multipliers are equal.
SmoothedDistribution bootstrap_cdf(const Sample& s, std::span<const double> xi,
                                   double bandwidth);

//! Re-runs the estimation chain on multiplier-weighted CDFs.  Orientation
//! and bandwidths stay frozen at the point estimate's values; each
//! replicate draws independent multiplier vectors for the two samples from
//! counter-indexed streams, so results are reproducible and independent of
//! evaluation order.  More than 10% failed replicates aborts.
BootstrapBands bootstrap_pipeline(const Sample& s1, const Sample& s2,
                                  const PriceSchedule& p1,
                                  const PriceSchedule& p2,
                                  const EstimationConfig& cfg,
                                  BootstrapTarget target,
                                  const PointEstimate& point,
                                  double level = 0.90);

}  // namespace iterfunc
