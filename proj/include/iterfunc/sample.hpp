#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace iterfunc {

//! One period's observations.  Prices and covariates are optional and, when
//! present, run parallel to the quantity list.
struct Sample {
  std::vector<double> quantities;
  std::vector<double> prices;      // empty when absent
  std::vector<double> covariates;  // empty when absent; small nonneg integers
  int period = 1;                  // 1 or 2
  bool normalized = false;
  double zero_share = 0.0;  // share of dropped zero-quantity observations
  double shift = 0.0;       // amount subtracted from every quantity

  std::size_t size() const { return quantities.size(); }
  bool has_prices() const { return !prices.empty(); }
  bool has_covariates() const { return !covariates.empty(); }
};

enum class ColumnRole { quantity, price, covariate };

//! Bandwidth selection policy for the smoothed distribution functions.
struct BandwidthChoice {
  enum Method { cross_validation, fixed } method = cross_validation;
  double value = 0.0;  // used when method == fixed
};

struct EstimationConfig {
  int grid_points = 199;
  double alpha_lo = 0.005;
  double alpha_hi = 0.995;
  double beta_var_tol = 1e-10;
  double iter_cap_factor = 5.0;
  BandwidthChoice bandwidth;
  int bootstrap_reps = 500;
  int quadrature_points = 512;
  std::uint64_t seed = 1;
  bool isotonize_lambda = false;
  // Optional polynomial price coefficients (constant term first).  When both
  // are set the estimator uses these schedules instead of fitting any.
  std::vector<double> theta1;
  std::vector<double> theta2;

  void validate() const;
  std::vector<double> alpha_grid() const;
  int iteration_cap(std::size_t n) const;
};

//! Reads a comma-separated file with a header row.  column_map sends header
//! names to roles; exactly one quantity column is required.  Rows whose
//! quantity cell is empty are dropped; any other unparsable cell is an
//! error naming the row and column.
Sample load_sample(const std::string& path,
                   const std::map<std::string, ColumnRole>& column_map);

//! load_sample with the default header names q, p, x.
Sample load_sample(const std::string& path);

void save_sample(const Sample& s, const std::string& path);

//! Drops zero-quantity observations (recording their share), then shifts
//! quantities down by the retained minimum so the support starts at the
//! origin.  A second application is a no-op; samples without at least two
//! distinct positive quantities are rejected.
Sample normalize_sample(Sample s);

//! key=value configuration file; '#' starts a comment.  Unknown keys are
//! errors.  Returns the defaults overlaid with the file's settings.
EstimationConfig load_config(const std::string& path);

//! Applies one key=value override; shared by the file loader and the CLI.
void apply_config_entry(EstimationConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace iterfunc
