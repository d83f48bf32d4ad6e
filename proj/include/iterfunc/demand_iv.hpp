#pragma once

#include <functional>
#include <map>
#include <vector>

#include "iterfunc/pipeline.hpp"
#include "iterfunc/sample.hpp"

namespace iterfunc {

//! Fitted coefficients of the per-unit price regression
//!   P/Q = theta_0 + theta_1 Q + ... + theta_{d-1} Q^{d-1},
//! i.e. a degree-d polynomial schedule with zero constant.
struct ThetaEstimate {
  std::vector<double> theta;
  int basis_degree = 0;      // d
  int instrument_levels = 0;  // distinct covariate values used
  int fitted_period = 1;
  std::vector<int> fitted_exponents;  // basis terms actually estimated
};

//! Instrumental-variable fit of the schedule coefficients using covariate
//! indicators as instruments.  Just-identified when the covariate takes as
//! many values as there are free coefficients (the moment equations are
//! solved exactly); more levels give the two-stage weighted solution.
//! `active` lists the exponents left free; the rest are pinned to zero and
//! reported as zero.  Empty means all of 0..degree.  Pinning matters: with
//! few instrument levels the level means of (1, Q, Q^2, ...) are nearly
//! collinear, and freeing a coefficient the schedule does not need can blow
//! up the variance of the whole fit.  `levels_used` restricts the fit to a
//! subset of covariate levels (empty = all observed); picking as many levels
//! as free coefficients forces the exact just-identified solve.
ThetaEstimate iv_estimate_theta(const Sample& s, int degree,
                                const std::vector<int>& active = {},
                                const std::vector<int>& levels_used = {});

//! Least-squares fit of the same regression without instruments, for samples
//! carrying prices but no covariate column.
ThetaEstimate ols_estimate_theta(const Sample& s, int degree);

//! Same moment system with the intercept pinned to a known value, leaving
//! only the slope coefficients free.  Used when the schedules share their
//! price for the first marginal unit (both clear against the same
//! population's marginal utility at zero) and the other period's level
//! means spread too little to pin the intercept on their own.
ThetaEstimate iv_estimate_theta_anchored(const Sample& s, int degree,
                                         double intercept,
                                         const std::vector<int>& active = {});

//! Per-observation price noise: P/Q minus the fitted per-unit schedule.
std::vector<double> price_residuals(const ThetaEstimate& th, const Sample& s);

//! Structural residuals zeta_i = -(u'(Q_i, X_i) - Psi'(Q_i)); u_prime maps
//! (quantity, covariate level) to the fitted marginal utility.
std::vector<double> structural_residuals(
    const std::function<double(double, int)>& u_prime, const ThetaEstimate& th,
    const Sample& s);

//! Empirical conditional CDF of the residuals at covariate level x,
//! evaluated on grid (closed on the left: a grid point equal to a residual
//! counts it).  Needs at least 20 observations at the level.
std::vector<double> conditional_cdf_epsilon(const std::vector<double>& eps,
                                            const std::vector<double>& x_values,
                                            int level,
                                            const std::vector<double>& grid);

//! r(alpha) from two fitted schedules through the base quantile, solver
//! sign convention: other minus base at the base quantile.
double r_hat_from_theta(const ThetaEstimate& th1, const ThetaEstimate& th2,
                        const std::function<double(double)>& base_quantile,
                        double alpha, int base = 2, double tau1 = 1.0,
                        double tau2 = 1.0);

//! Full covariate-stratified chain with estimated schedules: IV fit on each
//! period, per-level solver runs on the stratified samples, structural plus
//! price residuals for period 2, and conditional residual CDFs on a common
//! 101-point grid.
struct StratifiedEstimate {
  ThetaEstimate th1, th2;
  double tau1 = 1.0;
  std::map<int, QuantileSolution> lambda_by_x;
  std::map<int, UtilityEstimate> utility_by_x;
  std::vector<double> eps_hat;       // period-2 residuals, observation order
  std::vector<double> eps_grid;      // common evaluation grid
  std::map<int, std::vector<double>> cdf_by_x;
};

StratifiedEstimate run_stratified_estimate(const Sample& s1, const Sample& s2,
                                           const EstimationConfig& cfg,
                                           int degree = 2,
                                           const std::vector<int>& active1 = {},
                                           const std::vector<int>& active2 = {},
                                           bool share_intercept = false,
                                           const std::vector<int>& levels2 = {});

}  // namespace iterfunc
