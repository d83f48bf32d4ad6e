#include "iterfunc/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

const Segment& Orientation::segment_at(double alpha) const {
  if (segments.empty())
    throw std::logic_error("Orientation: no segments");
  for (const auto& s : segments)
    if (alpha < s.alpha_hi) return s;
  return segments.back();
}

double beta_step(const DistributionView& base, const DistributionView& other,
                 double alpha) {
  const double q = base.quantile(alpha);
  const double b = other.cdf(q);
  return std::clamp(b, 0.0, 1.0);
}

double iterate_beta(const DistributionView& base, const DistributionView& other,
                    double alpha, int k) {
  if (k < 0) throw std::invalid_argument("iterate_beta: negative count");
  double a = alpha;
  for (int i = 0; i < k; ++i) a = beta_step(base, other, a);
  return a;
}

double identify_tau(const PriceSchedule& p1, const PriceSchedule& p2,
                    double q_cross) {
  const double d1 = p1.slope(q_cross);
  const double d2 = p2.slope(q_cross);
  if (!std::isfinite(d1) || !std::isfinite(d2))
    throw std::runtime_error("identify_tau: nonfinite marginal price");
  if (d1 == 0.0)
    throw std::runtime_error(
        "identify_tau: period-1 marginal price vanishes at crossing");
  return d2 / d1;
}

Orientation detect_orientation(const DistributionView& g1,
                               const DistributionView& g2,
                               const PriceSchedule& p1, const PriceSchedule& p2,
                               double tau1, double tau2,
                               const EstimationConfig& cfg, std::size_t n_min) {
  const double lo = std::max(g1.support_lo, g2.support_lo);
  const double hi = std::min(g1.support_hi, g2.support_hi);
  if (!(lo < hi))
    throw std::runtime_error("detect_orientation: empty support intersection");

  Orientation ori;
  ori.tau1 = tau1;
  ori.tau2 = tau2;

  const auto qg = linspace(lo, hi, static_cast<std::size_t>(cfg.grid_points));
  std::size_t pos = 0, neg = 0;
  double max_gap = 0.0;
  for (double q : qg) {
    const double d = g1.cdf(q) - g2.cdf(q);
    max_gap = std::max(max_gap, std::fabs(d));
    if (d > 0.0)
      ++pos;
    else if (d < 0.0)
      ++neg;
  }
  if (max_gap < 2.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(
                    n_min, 1))))
    throw std::runtime_error(
        "detect_orientation: samples indistinguishable (uninformative)");

  const std::size_t nz = pos + neg;
  const double frac =
      nz == 0 ? 0.0
              : static_cast<double>(std::max(pos, neg)) /
                    static_cast<double>(nz);
  const int majority_base = pos >= neg ? 1 : 2;

  if (frac >= 0.95) {
    ori.segments.push_back({0.0, 1.0, majority_base});
    return ori;
  }

  // mixed signs: locate crossings of the scaled marginal-price difference
  auto d = [&](double q) { return tau2 * p2.slope(q) - tau1 * p1.slope(q); };
  std::vector<double> crossings;
  double prev_q = qg.front();
  double prev_d = d(prev_q);
  for (std::size_t i = 1; i < qg.size(); ++i) {
    const double cur_d = d(qg[i]);
    if (prev_d != 0.0 && cur_d != 0.0 && (prev_d > 0.0) != (cur_d > 0.0)) {
      crossings.push_back(bisect_root(d, prev_q, qg[i], 1e-8));
      prev_q = qg[i];
      prev_d = cur_d;
    } else if (cur_d != 0.0) {
      prev_q = qg[i];
      prev_d = cur_d;
    }
    // exact zeros are skipped; the bracket extends to the next signed value
  }

  // keep only crossings interior to the type distribution: schedules that
  // become tangent at a support endpoint (plus smoothing slop past it) do
  // not split the estimation range
  std::vector<double> kept_q, kept_a;
  for (double qc : crossings) {
    const double ac = 0.5 * (g1.cdf(qc) + g2.cdf(qc));
    if (ac >= 0.05 && ac <= 0.95) {
      kept_q.push_back(qc);
      kept_a.push_back(ac);
    }
  }
  crossings = std::move(kept_q);

  if (crossings.empty()) {
    ori.segments.push_back({0.0, 1.0, majority_base});
    return ori;
  }

  ori.crossing_q = crossings;
  ori.crossing_alpha = std::move(kept_a);

  // base per region from the sign of d between crossings
  std::vector<double> bounds{0.0};
  for (double a : ori.crossing_alpha) bounds.push_back(a);
  bounds.push_back(1.0);
  std::vector<double> qmid;
  qmid.push_back(0.5 * (lo + crossings.front()));
  for (std::size_t i = 1; i < crossings.size(); ++i)
    qmid.push_back(0.5 * (crossings[i - 1] + crossings[i]));
  qmid.push_back(0.5 * (crossings.back() + hi));
  for (std::size_t r = 0; r + 1 < bounds.size(); ++r) {
    // d > 0 means the period-2 CDF runs above: sample 2 is the base there
    const int base = d(qmid[r]) > 0.0 ? 2 : 1;
    ori.segments.push_back({bounds[r], bounds[r + 1], base});
  }
  return ori;
}

}  // namespace iterfunc
