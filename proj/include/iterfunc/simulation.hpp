#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "iterfunc/price.hpp"
#include "iterfunc/rng.hpp"
#include "iterfunc/sample.hpp"

namespace iterfunc {

enum class DesignId { one, two, appendix };

DesignId parse_design(const std::string& name);
std::string design_name(DesignId id);

//! A design plus its oracles.  true_utility takes (q, covariate level);
//! non-appendix designs ignore the level.
struct DesignSpec {
  DesignId design_id = DesignId::one;
  int n = 0;
  std::uint64_t seed = 1;
  std::function<double(double)> true_lambda;           // per-type quantile
  std::function<double(double, int)> true_utility;
  std::function<double(double, int)> true_cdf_eps;     // appendix oracle
};

DesignSpec make_design_spec(DesignId id, int n, std::uint64_t seed);

//! Known schedules for the two non-appendix designs (tau fields set).
PriceSchedule design1_p1();
PriceSchedule design1_p2();
PriceSchedule design2_p1();
PriceSchedule design2_p2();
//! True appendix polynomial schedules.
PriceSchedule appendix_p1();
PriceSchedule appendix_p2();

//! Draws the two cross sections: types by inverse transform, quantities by
//! the closed-form or numerically solved first-order conditions.
std::pair<Sample, Sample> gen_design1(int n, RngStream& rng);
std::pair<Sample, Sample> gen_design2(int n, RngStream& rng);
//! Appendix draw: covariates, types given covariates, price noise, and
//! recorded total prices.
std::pair<Sample, Sample> gen_appendix_design(int n, RngStream& rng);

//! Ridge-regularized inverse of the integral operator
//!   (K f)(a) = integral of f from a to beta(a),
//! discretized with trapezoid weights on a uniform m-point grid over [0,1];
//! the returned curve is the cumulative integral of the regularized
//! density, on the same grid.
struct TikhonovResult {
  std::vector<double> grid;
  std::vector<double> lambda;          // cumulative curve
  std::vector<double> lambda_density;  // regularized solution itself
  double solve_residual_sup = 0.0;
};

TikhonovResult tikhonov_comparator(const std::function<double(double)>& r,
                                   const std::function<double(double)>& beta,
                                   double rho, int m);

struct MetricRow {
  std::string design;
  int n = 0;
  int reps = 0;
  std::string metric;
  double value = 0.0;
};
using MetricsTable = std::vector<MetricRow>;

//! Repeated-draw study: per rep, generates data, runs the estimation chain,
//! and records oracle deviations; rows are across-rep summaries.  Fails if
//! more than 5% of reps error out.
MetricsTable run_monte_carlo(DesignId design, int n, int reps,
                             const EstimationConfig& cfg);

void write_metrics_csv(const MetricsTable& table, const std::string& path);

}  // namespace iterfunc
