#pragma once

#include <optional>
#include <vector>

#include "iterfunc/kernel.hpp"
#include "iterfunc/orientation.hpp"
#include "iterfunc/price.hpp"
#include "iterfunc/sample.hpp"
#include "iterfunc/solver.hpp"
#include "iterfunc/utility.hpp"

namespace iterfunc {

//! Counterfactual demand responses along the quantity grid.  Points outside
//! the central range of the data (5th-95th percentile) are still computed
//! but flagged unreliable.
struct ElasticityProfile {
  std::vector<double> q;
  std::vector<double> level;
  std::vector<double> curvature;
  std::vector<double> convex;
  std::vector<char> reliable;
};

//! Full single-pass estimate: bandwidths, orientation, type quantile
//! function, reconstructed utility, elasticities.
struct PointEstimate {
  BandwidthResult h1, h2;
  Orientation orientation;
  QuantileSolution lambda;
  UtilityEstimate utility;
  ElasticityProfile elasticity;
  std::vector<double> q_grid;
  double q_lo_reliable = 0.0, q_hi_reliable = 0.0;
};

//! Runs the whole chain on two loaded (already normalized) samples.
//! Schedules carry the money-utility scalings in their tau fields; tau1 is
//! re-derived from the schedules at the detected crossing when one exists.
PointEstimate run_point_estimate(const Sample& s1, const Sample& s2,
                                 const PriceSchedule& p1,
                                 const PriceSchedule& p2,
                                 const EstimationConfig& cfg,
                                 bool with_residual = true,
                                 bool with_elasticity = true);

//! The solver-facing bundle for a pair of fitted distributions.
SolverInputs make_solver_inputs(const DistributionView& g1,
                                const DistributionView& g2,
                                const PriceSchedule& p1,
                                const PriceSchedule& p2);

//! Elasticity curves from a fitted type quantile function; reference slope
//! for the convex family is the marginal price at zero.
ElasticityProfile elasticity_profile(const PriceSchedule& price,
                                     const QuantileSolution& lambda,
                                     const SmoothedDistribution& gd,
                                     std::span<const double> q_grid,
                                     double q_lo_reliable,
                                     double q_hi_reliable);

}  // namespace iterfunc
