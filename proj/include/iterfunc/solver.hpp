#pragma once

#include <vector>

#include "iterfunc/kernel.hpp"
#include "iterfunc/orientation.hpp"
#include "iterfunc/price.hpp"
#include "iterfunc/sample.hpp"

namespace iterfunc {

//! Everything the series evaluation needs: the two distribution handles and
//! the two marginal-price functions with their money-utility scalings.
struct SolverInputs {
  DistributionView g1, g2;
  std::function<double(double)> p1slope, p2slope;
  double tau1 = 1.0;
  double tau2 = 1.0;
};

struct SegmentSolution {
  Segment seg;
  int iterations = 0;   // N for this segment's truncated series
  double offset = 0.0;  // level carried over from the preceding segment
  std::size_t first_grid = 0, grid_count = 0;  // slice of the alpha grid
  // orbit clamp window in the base sample's own cdf scale; at these bounds
  // the increment function vanishes by construction
  double conf_lo = 0.0, conf_hi = 1.0;
  // orbits freeze below this quantity: a spurious crossing of the smoothed
  // cdfs near the lower data edge would otherwise act as an attractor
  double q_floor = 0.0;
};

//! Truncated-series solution of  L(beta(a)) - L(a) = r(a)  on the alpha
//! grid, anchored at L -> 0 toward the lower support end.
struct QuantileSolution {
  std::vector<double> alpha;   // grid
  std::vector<double> lambda;  // estimate at each grid point
  Orientation orientation;
  std::vector<SegmentSolution> segments;
  int iterations_used = 0;  // max segment iteration count
  double residual_sup = 0.0;
  bool monotone = false;      // raw output nondecreasing (reported, not forced)
  bool isotonized = false;
  double isotonize_distance = 0.0;

  //! Monotonicity-preserving cubic interpolation on the grid; below the
  //! grid the value decays linearly through the origin, above it stays
  //! constant.
  double value(double a) const;
};

//! r(alpha) = [tau_other P'_other - tau_base P'_base](base_quantile(alpha)).
double r_eval(const SolverInputs& in, int base, double alpha);

//! Runs the truncated series on the alpha grid.  Iteration stops per
//! segment once the grid variance of the beta iterates falls below
//! beta_var_tol, capped at ceil(iter_cap_factor * log(n)).  with_residual
//! controls the residual_sup diagnostic, which costs a second pass; resample
//! replicates switch it off.
QuantileSolution solve_lambda(const Orientation& ori, const SolverInputs& in,
                              const EstimationConfig& cfg, std::size_t n,
                              bool with_residual = true);

//! Sup over the grid of |L(beta(a)) - L(a) - r(a)|, with L re-evaluated
//! through the same truncated series at the off-grid point, so that for
//! exact inputs the result reduces to sup |r(beta^{(N+1)}(a))|.
double residual_check(const QuantileSolution& sol, const SolverInputs& in);

//! Geometric tail bound C * theta^{(N+1) kappa} / (1 - theta^kappa).
double truncation_bound(double C, double theta, double kappa, int N);

}  // namespace iterfunc
