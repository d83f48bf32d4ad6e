#pragma once

#include <functional>
#include <span>
#include <vector>

namespace iterfunc {

//! Type-erased distribution handle: what the iteration actually needs.
//! Smoothed estimates and closed-form distributions both provide one.
struct DistributionView {
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
  //! Optional bracket-assisted inverse for callers that can localize the
  //! answer (same result as quantile, found faster).
  std::function<double(double, double, double)> quantile_hinted;
  double support_lo = 0.0;
  double support_hi = 1.0;
  double bandwidth = 0.0;  // smoothing scale; 0 for exact distributions
};

//! Gaussian-kernel smoothed distribution function
//!   G_h(q) = (1/n) sum_i w_i Phi((q - Q_i)/h),
//! with optional positive weights normalized to mean one (used by the
//! multiplier bootstrap; unit weights otherwise).
//!
//! Evaluation sums only terms with |q - Q_i| <= 8h over the sorted data;
//! the neglected tail mass is below 1e-15 per observation, well inside the
//! 1e-12 accuracy target of the integrated kernel itself.
class SmoothedDistribution {
 public:
  //! nonneg_domain floors the quantile range at zero, the natural domain
  //! boundary for quantities; the smoothing itself is unaffected.
  SmoothedDistribution(std::vector<double> data, double bandwidth,
                       bool nonneg_domain = true);
  SmoothedDistribution(std::vector<double> data, std::vector<double> weights,
                       double bandwidth, bool nonneg_domain = true);

  double bandwidth() const { return h_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  std::size_t size() const { return q_.size(); }
  const std::vector<double>& sorted_data() const { return q_; }

  double cdf(double q) const;
  double density(double q) const;
  double density_derivative(double q) const;

  //! Generalized inverse: smallest q in [support_lo, support_hi] with
  //! cdf(q) >= alpha, located to 1e-10; alpha outside the attained range
  //! clamps to the support endpoints.
  double quantile(double alpha) const;

  //! Same inverse, seeded with a caller-supplied bracket guess.  Returns the
  //! identical answer; the guess only narrows the initial search interval and
  //! is widened back to the full support when it fails to bracket.
  double quantile_in(double alpha, double lo_guess, double hi_guess) const;

  //! Borrowing view; keep this object alive while the view is in use.
  DistributionView view() const;

 private:
  double refine_quantile(double alpha, double a, double b) const;
  void init();
  std::vector<double> q_;     // ascending
  std::vector<double> w_;    // aligned weights, sum = n; empty means unit
  std::vector<double> wcum_;  // prefix sums of w_, length n+1
  double h_ = 0.0;
  double lo_ = 0.0, hi_ = 0.0;
};

//! Vocabulary constructor mirroring the estimator notation.
SmoothedDistribution smooth_cdf(std::vector<double> data, double bandwidth);

struct BandwidthResult {
  double h = 0.0;
  bool fallback = false;  // set when the data had too few distinct values
};

//! Least-squares cross-validation for the smoothed distribution function:
//! minimizes the leave-one-out integrated squared error over a 30-point
//! logarithmic grid h in [0.05, 2] * sd * n^(-1/3).  Fewer than ten
//! distinct values selects the reference rate sd * n^(-1/3) instead.
BandwidthResult cv_bandwidth(std::span<const double> data);

//! Closed-form distribution wrapped as a view; quantile falls back to
//! bisection of the cdf when no inverse is supplied.
DistributionView analytic_distribution(std::function<double(double)> cdf,
                                       double lo, double hi,
                                       std::function<double(double)> quantile =
                                           nullptr);

}  // namespace iterfunc
