#pragma once

#include <span>
#include <vector>

#include "iterfunc/kernel.hpp"
#include "iterfunc/price.hpp"
#include "iterfunc/solver.hpp"

namespace iterfunc {

//! Reconstructed utility on a quantity grid.  u is the cumulative trapezoid
//! integral of u_prime, so u_values[0] = 0 fixes the location.
struct UtilityEstimate {
  std::vector<double> q_grid;
  std::vector<double> u_values;
  std::vector<double> u_prime;
  std::vector<double> u_second;  // central differences of u_prime
};

//! Uniform quantity grid with the given number of panels (panels+1 nodes).
std::vector<double> quantity_grid(double lo, double hi, std::size_t panels);

//! u'(q) = tau P'(q) - L(G(q)), integrated up from q_grid.front().
//! L is evaluated through QuantileSolution::value, whose extrapolation
//! anchors L(0) = 0 below the alpha grid.
UtilityEstimate reconstruct_utility(const PriceSchedule& price,
                                    const QuantileSolution& lambda,
                                    const DistributionView& g,
                                    std::span<const double> q_grid);

//! Density of the preference type at L(alpha): reciprocal slope of the
//! estimated quantile function, finite-differenced over a three-point
//! window of the alpha grid.
double type_density_from_lambda(const QuantileSolution& lambda, double alpha);

//! u''(q) = tau P''(q) - g(q) / f_eps, with f_eps the type density at the
//! matching type value.  f_eps below 1e-6 is rejected.
double second_derivative_utility(const PriceSchedule& price, double g_at_q,
                                 double f_eps, double q);

//! Demand response to scaling the whole schedule:  P'(q) / (q [u'' - P'']).
double elasticity_level(const PriceSchedule& price, double u_second, double q);

//! Demand response to a power-law bend of the schedule:
//!   P'(q) (1 + ln P(q)) / (q [u'' - P'']).
double elasticity_curvature(const PriceSchedule& price, double u_second,
                            double q);

//! Demand response to mixing toward a reference schedule with slope
//! p0_slope at q:  (P'(q) - P0'(q)) / (q [u'' - P'']).
double elasticity_convex(const PriceSchedule& price, double p0_slope,
                         double u_second, double q);

}  // namespace iterfunc
