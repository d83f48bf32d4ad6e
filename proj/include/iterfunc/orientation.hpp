#pragma once

#include <vector>

#include "iterfunc/kernel.hpp"
#include "iterfunc/price.hpp"
#include "iterfunc/sample.hpp"

namespace iterfunc {

//! One alpha-interval on which a single sample's CDF dominates.  The base
//! sample is the dominated one (pointwise larger CDF, smaller quantities);
//! iterating beta from the base side contracts toward the segment floor.
struct Segment {
  double alpha_lo = 0.0;
  double alpha_hi = 1.0;
  int base = 2;  // 1 or 2
};

struct Orientation {
  double tau1 = 1.0;  // period-1 marginal utility of money (period 2 = 1)
  double tau2 = 1.0;
  std::vector<Segment> segments;        // ascending, partitioning the grid
  std::vector<double> crossing_alpha;   // interior crossings, alpha scale
  std::vector<double> crossing_q;       // same crossings, quantity scale
  bool single_segment() const { return segments.size() == 1; }
  int base() const { return segments.empty() ? 2 : segments.front().base; }
  const Segment& segment_at(double alpha) const;
};

//! One step of the comparison map: beta(alpha) = G_other(G_base^{-1}(alpha)),
//! clamped to [0,1].
double beta_step(const DistributionView& base, const DistributionView& other,
                 double alpha);

//! k-fold composition of beta_step; k = 0 returns alpha.
double iterate_beta(const DistributionView& base, const DistributionView& other,
                    double alpha, int k);

//! Ratio of marginal prices at a crossing quantity: tau1 = P2'(q)/P1'(q).
//! q = 0 is the known-schedule normalization point.
double identify_tau(const PriceSchedule& p1, const PriceSchedule& p2,
                    double q_cross);

//! Decides which sample is the base and how the grid splits into segments.
//! The CDFs are compared on a quantity grid over the support intersection;
//! a 95% one-sided sign fraction means a single segment.  Otherwise the
//! sign changes of tau2 P2' - tau1 P1' locate the crossings and the base
//! alternates across them.  n_min (smaller sample size) feeds the
//! uninformative-sample guard.
Orientation detect_orientation(const DistributionView& g1,
                               const DistributionView& g2,
                               const PriceSchedule& p1, const PriceSchedule& p2,
                               double tau1, double tau2,
                               const EstimationConfig& cfg, std::size_t n_min);

}  // namespace iterfunc
