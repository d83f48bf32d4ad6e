#include "iterfunc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

namespace {

// One segment's worth of wiring: which sample drives the quantile map and
// which supplies the composed cdf, plus the matching price slopes.
struct SegmentCtx {
  const DistributionView* base;
  const DistributionView* other;
  double tau_base, tau_other;
  const std::function<double(double)>* slope_base;
  const std::function<double(double)>* slope_other;
};

SegmentCtx make_ctx(const SolverInputs& in, int base) {
  if (base != 1 && base != 2)
    throw std::invalid_argument("solver: base sample must be 1 or 2");
  SegmentCtx c;
  if (base == 1) {
    c.base = &in.g1;
    c.other = &in.g2;
    c.tau_base = in.tau1;
    c.tau_other = in.tau2;
    c.slope_base = &in.p1slope;
    c.slope_other = &in.p2slope;
  } else {
    c.base = &in.g2;
    c.other = &in.g1;
    c.tau_base = in.tau2;
    c.tau_other = in.tau1;
    c.slope_base = &in.p2slope;
    c.slope_other = &in.p1slope;
  }
  return c;
}

double rho_at(const SegmentCtx& c, double q) {
  const double r = c.tau_other * (*c.slope_other)(q) -
                   c.tau_base * (*c.slope_base)(q);
  if (!std::isfinite(r))
    throw std::runtime_error("solver: marginal price difference not finite");
  return r;
}

double hinted_quantile(const DistributionView& v, double alpha, double lo,
                       double hi) {
  if (v.quantile_hinted) return v.quantile_hinted(alpha, lo, hi);
  return v.quantile(alpha);
}

// Truncated series at one point with a fixed term count:
//   -sum_{k=0..iters} r(beta^(k)(alpha)).
// Iterates are confined to [a_lo, a_hi]: at those bounds the increment
// vanishes by construction, while estimated maps can push an iterate
// across and off to a divergent region.  A bitwise-repeating iterate sits
// at a fixed point of the map, where the ideal increment is zero, so the
// sum ends there rather than replaying the sampled one.  An upward step
// marks the orbit escaped (the ideal map descends) and also ends the sum.
double series_at(const SegmentCtx& c, double alpha, int iters, double a_lo,
                 double a_hi, double q_floor, bool* escaped_out = nullptr) {
  double acc = 0.0;
  double b = std::clamp(alpha, a_lo, a_hi);
  double prev_q = c.base->support_hi;
  for (int k = 0; k <= iters; ++k) {
    const double q =
        hinted_quantile(*c.base, b, c.base->support_lo, prev_q + 1e-9);
    prev_q = q;
    if (q < q_floor) break;
    acc += rho_at(c, q);
    if (k == iters) break;
    const double bn = std::clamp(c.other->cdf(q), a_lo, a_hi);
    if (bn > b) {
      if (escaped_out) *escaped_out = true;
      break;
    }
    if (bn == b) break;
    b = bn;
  }
  return -acc;
}

// Near the lower data edge the two smoothed cdfs leak past the boundary at
// different rates and can cross, even though the underlying distributions
// stay ordered down to zero.  The comparison map treats such a crossing as
// an attractor with a nonvanishing increment, so orbits that reach the zone
// grind out junk terms.  Locate the topmost crossing in the bottom quarter
// of the segment's quantity range and put a freeze level half a bandwidth
// above it; exact distributions (zero bandwidth) never get a floor.
double locate_q_floor(const SegmentCtx& c, const Segment& seg) {
  const double hbar = std::max(c.base->bandwidth, c.other->bandwidth);
  if (hbar <= 0.0) return 0.0;
  const double lo =
      std::max({0.0, c.base->support_lo, c.other->support_lo});
  const double hi = c.base->quantile(
      seg.alpha_lo + 0.25 * (seg.alpha_hi - seg.alpha_lo));
  if (!(hi > lo)) return 0.0;
  const auto gap = [&](double q) { return c.base->cdf(q) - c.other->cdf(q); };
  const int np = 256;
  for (int i = np; i >= 0; --i) {
    const double q = lo + (hi - lo) * i / np;
    if (gap(q) > 0.0) continue;
    if (i == np) return hi;
    double a = q, b = lo + (hi - lo) * (i + 1) / np;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (a + b);
      (gap(mid) <= 0.0 ? a : b) = mid;
    }
    return std::min(0.5 * (a + b) + 0.75 * hbar, hi);
  }
  // ordered all the way down: no attractor, orbits may run out the tail
  return 0.0;
}

const SegmentSolution& segment_solution_at(const QuantileSolution& sol,
                                           double a) {
  for (const auto& ss : sol.segments)
    if (a < ss.seg.alpha_hi) return ss;
  return sol.segments.back();
}

}  // namespace

double r_eval(const SolverInputs& in, int base, double alpha) {
  const SegmentCtx c = make_ctx(in, base);
  return rho_at(c, c.base->quantile(std::clamp(alpha, 0.0, 1.0)));
}

QuantileSolution solve_lambda(const Orientation& ori, const SolverInputs& in,
                              const EstimationConfig& cfg, std::size_t n,
                              bool with_residual) {
  cfg.validate();
  if (ori.segments.empty())
    throw std::invalid_argument("solve_lambda: orientation has no segments");

  QuantileSolution sol;
  sol.orientation = ori;
  sol.alpha = cfg.alpha_grid();
  sol.lambda.assign(sol.alpha.size(), 0.0);
  const int cap = cfg.iteration_cap(n);
  const double dstep =
      sol.alpha.size() > 1 ? sol.alpha[1] - sol.alpha[0] : 0.005;

  std::size_t pos = 0;
  double running_offset = 0.0;
  int max_iters = 0;
  for (std::size_t s = 0; s < ori.segments.size(); ++s) {
    const Segment seg = ori.segments[s];
    const bool last_seg = s + 1 == ori.segments.size();
    SegmentSolution ss;
    ss.seg = seg;
    ss.offset = running_offset;
    ss.first_grid = pos;
    while (pos < sol.alpha.size() && (last_seg || sol.alpha[pos] < seg.alpha_hi))
      ++pos;
    ss.grid_count = pos - ss.first_grid;

    const SegmentCtx c = make_ctx(in, seg.base);
    // Orbits are clamped in the base sample's own cdf scale at the crossing
    // quantities, where the increment vanishes by construction.  The grid is
    // partitioned at the averaged boundary instead, so the two can differ by
    // sampling noise; a stalled orbit must land where its increment is zero,
    // or the leftover noise is replayed once per remaining iteration.
    double conf_lo = 0.0, conf_hi = 1.0;
    if (s > 0) conf_lo = std::clamp(c.base->cdf(ori.crossing_q[s - 1]), 0.0, 1.0);
    if (!last_seg) conf_hi = std::clamp(c.base->cdf(ori.crossing_q[s]), 0.0, 1.0);
    if (!(conf_lo < conf_hi)) {
      conf_lo = seg.alpha_lo;
      conf_hi = seg.alpha_hi;
    }
    ss.conf_lo = conf_lo;
    ss.conf_hi = conf_hi;
    // only the bottom segment runs orbits into the lower data edge; upper
    // segments are held off it by their crossing clamp
    ss.q_floor = s == 0 ? locate_q_floor(c, seg) : 0.0;
    const std::size_t m = ss.grid_count;
    // top two grid points whose orbit never left the segment
    std::ptrdiff_t clean1 = -1, clean2 = -1;
    if (m > 0) {
      std::vector<double> beta(m), acc(m, 0.0);
      std::vector<double> qprev(m, c.base->support_hi);
      std::vector<char> frozen(m, 0), escaped(m, 0);
      for (std::size_t i = 0; i < m; ++i)
        beta[i] = std::clamp(sol.alpha[ss.first_grid + i], conf_lo, conf_hi);
      std::vector<double> live;
      live.reserve(m);
      for (int k = 0;; ++k) {
        bool stop = k >= cap;
        if (!stop) {
          // escaped orbits are inert; the rest either sit at a fixed point
          // already or must have contracted to one cluster before the
          // variance rule can end the iteration
          live.clear();
          bool all_frozen = true;
          for (std::size_t i = 0; i < m; ++i) {
            if (!frozen[i]) all_frozen = false;
            if (!escaped[i]) live.push_back(beta[i]);
          }
          if (all_frozen) stop = true;
          else if (live.size() >= 2 && grid_variance(live) < cfg.beta_var_tol)
            stop = true;
        }
        double left_q = c.base->support_lo;
        for (std::size_t i = 0; i < m; ++i) {
          if (frozen[i]) continue;
          // beta is nondecreasing across the grid at every k and
          // nonincreasing in k pointwise, which brackets the quantile
          const double q = hinted_quantile(*c.base, beta[i], left_q - 1e-9,
                                           qprev[i] + 1e-9);
          left_q = q;
          qprev[i] = q;
          if (q < ss.q_floor) {
            frozen[i] = 1;
            continue;
          }
          acc[i] += rho_at(c, q);
          if (!stop) {
            const double bn = std::clamp(c.other->cdf(q), conf_lo, conf_hi);
            if (bn > beta[i]) {
              // the ideal comparison map descends within a segment; an
              // upward step means noise pushed the orbit toward a spurious
              // attractor, so it stops here and is patched afterwards
              escaped[i] = 1;
              frozen[i] = 1;
            } else if (bn == beta[i]) {
              frozen[i] = 1;
            } else {
              beta[i] = bn;
            }
          }
        }
        if (stop) {
          ss.iterations = k;
          break;
        }
      }
      for (std::size_t i = 0; i < m; ++i)
        sol.lambda[ss.first_grid + i] = ss.offset - acc[i];
      // An escaped orbit stopped early and misses part of its descent.
      // Patch those points from their surviving neighbors: a run at the
      // bottom of the segment leans on the boundary level itself, runs
      // inside the grid interpolate between the flanking clean points, and
      // a run at the top extends the last clean slope.
      std::vector<std::size_t> clean;
      for (std::size_t i = 0; i < m; ++i)
        if (!escaped[i]) clean.push_back(i);
      if (!clean.empty() && clean.size() < m) {
        const double* ga = sol.alpha.data() + ss.first_grid;
        double* gl = sol.lambda.data() + ss.first_grid;
        const auto lerp = [&](std::size_t i, double a0, double l0, double a1,
                              double l1) {
          gl[i] = l0 + (ga[i] - a0) * (l1 - l0) / (a1 - a0);
        };
        for (std::size_t i = 0; i < clean.front(); ++i)
          lerp(i, seg.alpha_lo, ss.offset, ga[clean.front()],
               gl[clean.front()]);
        for (std::size_t ci = 0; ci + 1 < clean.size(); ++ci)
          for (std::size_t i = clean[ci] + 1; i < clean[ci + 1]; ++i)
            lerp(i, ga[clean[ci]], gl[clean[ci]], ga[clean[ci + 1]],
                 gl[clean[ci + 1]]);
        for (std::size_t i = clean.back() + 1; i < m; ++i) {
          if (clean.size() >= 2)
            lerp(i, ga[clean[clean.size() - 2]], gl[clean[clean.size() - 2]],
                 ga[clean.back()], gl[clean.back()]);
          else
            lerp(i, seg.alpha_lo, ss.offset, ga[clean.back()],
                 gl[clean.back()]);
        }
      }
      if (!clean.empty()) clean1 = static_cast<std::ptrdiff_t>(clean.back());
      if (clean.size() >= 2)
        clean2 = static_cast<std::ptrdiff_t>(clean[clean.size() - 2]);
      max_iters = std::max(max_iters, ss.iterations);
    } else {
      ss.iterations = cap;
    }

    if (!last_seg) {
      // The boundary is a fixed point of both segment maps, so the series
      // evaluated exactly there collapses; extrapolate the level from just
      // inside instead and carry it as the next segment's offset.
      if (clean1 >= 0 && clean2 >= 0) {
        const double a1 = sol.alpha[ss.first_grid + clean1];
        const double a2 = sol.alpha[ss.first_grid + clean2];
        const double l1 = sol.lambda[ss.first_grid + clean1];
        const double l2 = sol.lambda[ss.first_grid + clean2];
        running_offset =
            l1 + (seg.alpha_hi - a1) * (l1 - l2) / (a1 - a2);
      } else {
        const double b = seg.alpha_hi;
        const double width = std::max(b - seg.alpha_lo, 1e-8);
        const double d = std::min(dstep, 0.25 * width);
        const double s1 =
            series_at(c, b - d, ss.iterations, conf_lo, conf_hi, ss.q_floor);
        const double s2 = series_at(c, b - 2.0 * d, ss.iterations, conf_lo,
                                    conf_hi, ss.q_floor);
        running_offset = ss.offset + 2.0 * s1 - s2;
      }
    }
    sol.segments.push_back(ss);
  }
  sol.iterations_used = max_iters;

  sol.monotone = true;
  for (std::size_t i = 1; i < sol.lambda.size(); ++i)
    if (sol.lambda[i] < sol.lambda[i - 1] - 1e-12) {
      sol.monotone = false;
      break;
    }

  // residual of the raw series, before any monotone correction
  if (with_residual) sol.residual_sup = residual_check(sol, in);

  if (cfg.isotonize_lambda) {
    std::vector<double> proj = isotonic_nondecreasing(sol.lambda);
    double dist = 0.0;
    for (std::size_t i = 0; i < proj.size(); ++i)
      dist = std::max(dist, std::fabs(proj[i] - sol.lambda[i]));
    sol.lambda = std::move(proj);
    sol.isotonized = true;
    sol.isotonize_distance = dist;
  }
  return sol;
}

double residual_check(const QuantileSolution& sol, const SolverInputs& in) {
  if (sol.segments.empty() || sol.alpha.empty())
    throw std::invalid_argument("residual_check: empty solution");
  double sup = 0.0;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
    const double a = sol.alpha[i];
    const SegmentSolution& ss = segment_solution_at(sol, a);
    const SegmentCtx c = make_ctx(in, ss.seg.base);
    const double q = c.base->quantile(a);
    // the stored curve is deliberately truncated below the boundary floor
    if (q < ss.q_floor) continue;
    const double r = rho_at(c, q);
    const double bn = std::clamp(c.other->cdf(q), 0.0, 1.0);
    // grid-point level comes straight from the stored curve; only the
    // shifted point needs a fresh series evaluation.  An orbit that noise
    // pushed upward never satisfies the identity, so it is not checked.
    const SegmentSolution& sb = segment_solution_at(sol, bn);
    const SegmentCtx cb = make_ctx(in, sb.seg.base);
    bool escaped = bn > a;
    const double level =
        escaped ? 0.0
                : sb.offset + series_at(cb, bn, sb.iterations, sb.conf_lo,
                                        sb.conf_hi, sb.q_floor, &escaped);
    if (escaped) continue;
    const double res = level - sol.lambda[i] - r;
    sup = std::max(sup, std::fabs(res));
  }
  return sup;
}

double truncation_bound(double C, double theta, double kappa, int N) {
  if (!(C >= 0.0) || !(theta > 0.0) || !(theta < 1.0) || !(kappa > 0.0) ||
      N < 0)
    throw std::invalid_argument("truncation_bound: need C >= 0, theta in "
                                "(0,1), kappa > 0, N >= 0");
  const double tk = std::pow(theta, kappa);
  return C * std::pow(theta, (static_cast<double>(N) + 1.0) * kappa) /
         (1.0 - tk);
}

namespace {

// Fritsch-Carlson node slope: harmonic-mean blend of the adjacent secants
// when they share a sign, zero otherwise (keeps the interpolant monotone
// where the data is).
double fc_slope(double h0, double h1, double s0, double s1) {
  if (s0 * s1 <= 0.0) return 0.0;
  const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
  return (w0 + w1) / (w0 / s0 + w1 / s1);
}

}  // namespace

double QuantileSolution::value(double a) const {
  if (alpha.empty()) throw std::logic_error("QuantileSolution::value: empty");
  if (a <= alpha.front()) {
    if (alpha.front() <= 0.0) return lambda.front();
    return std::max(a, 0.0) / alpha.front() * lambda.front();
  }
  if (a >= alpha.back()) return lambda.back();
  const std::size_t m = alpha.size();
  const auto it = std::upper_bound(alpha.begin(), alpha.end(), a);
  const std::size_t j = static_cast<std::size_t>(it - alpha.begin());
  const std::size_t i = j - 1;
  const double h = alpha[j] - alpha[i];
  const double s = (lambda[j] - lambda[i]) / h;
  if (m == 2) return lambda[i] + (a - alpha[i]) * s;
  // node derivatives from the neighboring secants
  double d0, d1;
  if (i == 0) {
    const double hr = alpha[2] - alpha[1];
    const double sr = (lambda[2] - lambda[1]) / hr;
    d0 = ((2.0 * h + hr) * s - h * sr) / (h + hr);
    if (d0 * s <= 0.0)
      d0 = 0.0;
    else if (sr * s <= 0.0 && std::fabs(d0) > 3.0 * std::fabs(s))
      d0 = 3.0 * s;
    d1 = fc_slope(h, hr, s, sr);
  } else if (j == m - 1) {
    const double hl = alpha[i] - alpha[i - 1];
    const double sl = (lambda[i] - lambda[i - 1]) / hl;
    d0 = fc_slope(hl, h, sl, s);
    d1 = ((2.0 * h + hl) * s - h * sl) / (h + hl);
    if (d1 * s <= 0.0)
      d1 = 0.0;
    else if (sl * s <= 0.0 && std::fabs(d1) > 3.0 * std::fabs(s))
      d1 = 3.0 * s;
  } else {
    const double hl = alpha[i] - alpha[i - 1];
    const double sl = (lambda[i] - lambda[i - 1]) / hl;
    const double hr = alpha[j + 1] - alpha[j];
    const double sr = (lambda[j + 1] - lambda[j]) / hr;
    d0 = fc_slope(hl, h, sl, s);
    d1 = fc_slope(h, hr, s, sr);
  }
  const double t = (a - alpha[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * lambda[i] +
         (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * lambda[j] +
         (t3 - t2) * h * d1;
}

}  // namespace iterfunc
