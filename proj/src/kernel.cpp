#include "iterfunc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

namespace {
constexpr double kernel_reach = 8.0;  // Phi(-8) ~ 6e-16: below fp noise
}

SmoothedDistribution::SmoothedDistribution(std::vector<double> data,
                                           double bandwidth, bool nonneg_domain)
    : q_(std::move(data)), h_(bandwidth) {
  std::sort(q_.begin(), q_.end());
  lo_ = q_.front() - 5.0 * h_;
  if (nonneg_domain && q_.front() >= 0.0) lo_ = std::max(lo_, 0.0);
  hi_ = q_.back() + 5.0 * h_;
  init();
}

SmoothedDistribution::SmoothedDistribution(std::vector<double> data,
                                           std::vector<double> weights,
                                           double bandwidth, bool nonneg_domain)
    : h_(bandwidth) {
  if (data.size() != weights.size())
    throw std::invalid_argument("SmoothedDistribution: weight length mismatch");
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("SmoothedDistribution: empty data");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0))
      throw std::invalid_argument(
          "SmoothedDistribution: weights must be positive");
    wsum += w;
  }
  // sort data, carrying weights along, then normalize to sum n
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return data[a] < data[b]; });
  q_.resize(n);
  w_.resize(n);
  const double scale = static_cast<double>(n) / wsum;
  for (std::size_t i = 0; i < n; ++i) {
    q_[i] = data[idx[i]];
    w_[i] = weights[idx[i]] * scale;
  }
  lo_ = q_.front() - 5.0 * h_;
  if (nonneg_domain && q_.front() >= 0.0) lo_ = std::max(lo_, 0.0);
  hi_ = q_.back() + 5.0 * h_;
  init();
}

void SmoothedDistribution::init() {
  if (q_.empty()) throw std::invalid_argument("SmoothedDistribution: empty data");
  if (!(h_ > 0.0))
    throw std::invalid_argument("SmoothedDistribution: bandwidth must be > 0");
  wcum_.assign(q_.size() + 1, 0.0);
  for (std::size_t i = 0; i < q_.size(); ++i)
    wcum_[i + 1] = wcum_[i] + (w_.empty() ? 1.0 : w_[i]);
}

double SmoothedDistribution::cdf(double q) const {
  const double reach = kernel_reach * h_;
  const std::size_t n = q_.size();
  const std::size_t a = static_cast<std::size_t>(
      std::lower_bound(q_.begin(), q_.end(), q - reach) - q_.begin());
  const std::size_t b = static_cast<std::size_t>(
      std::upper_bound(q_.begin(), q_.end(), q + reach) - q_.begin());
  double acc = wcum_[a];  // observations far below q contribute 1 each
  if (w_.empty()) {
    for (std::size_t i = a; i < b; ++i)
      acc += normal_cdf((q - q_[i]) / h_);
  } else {
    for (std::size_t i = a; i < b; ++i)
      acc += w_[i] * normal_cdf((q - q_[i]) / h_);
  }
  return acc / static_cast<double>(n);
}

double SmoothedDistribution::density(double q) const {
  const double reach = kernel_reach * h_;
  const std::size_t n = q_.size();
  const std::size_t a = static_cast<std::size_t>(
      std::lower_bound(q_.begin(), q_.end(), q - reach) - q_.begin());
  const std::size_t b = static_cast<std::size_t>(
      std::upper_bound(q_.begin(), q_.end(), q + reach) - q_.begin());
  double acc = 0.0;
  for (std::size_t i = a; i < b; ++i) {
    const double k = normal_pdf((q - q_[i]) / h_);
    acc += w_.empty() ? k : w_[i] * k;
  }
  return acc / (static_cast<double>(n) * h_);
}

double SmoothedDistribution::density_derivative(double q) const {
  const double reach = kernel_reach * h_;
  const std::size_t n = q_.size();
  const std::size_t a = static_cast<std::size_t>(
      std::lower_bound(q_.begin(), q_.end(), q - reach) - q_.begin());
  const std::size_t b = static_cast<std::size_t>(
      std::upper_bound(q_.begin(), q_.end(), q + reach) - q_.begin());
  double acc = 0.0;
  for (std::size_t i = a; i < b; ++i) {
    const double z = (q - q_[i]) / h_;
    const double k = -z * normal_pdf(z);  // K'(z)
    acc += w_.empty() ? k : w_[i] * k;
  }
  return acc / (static_cast<double>(n) * h_ * h_);
}

double SmoothedDistribution::refine_quantile(double alpha, double a,
                                             double b) const {
  // bisection with density-based refinement; the cdf is strictly
  // increasing so the bracket never degenerates
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
    const double fx = cdf(x);
    if (fx >= alpha)
      b = x;
    else
      a = x;
    double next = 0.5 * (a + b);
    const double d = density(x);
    if (d > 0.0) {
      const double cand = x - (fx - alpha) / d;
      if (cand > a && cand < b) next = cand;
    }
    x = next;
  }
  return b;
}

double SmoothedDistribution::quantile(double alpha) const {
  if (alpha <= cdf(lo_)) return lo_;
  if (alpha > cdf(hi_)) return hi_;
  return refine_quantile(alpha, lo_, hi_);
}

double SmoothedDistribution::quantile_in(double alpha, double lo_guess,
                                         double hi_guess) const {
  if (alpha <= cdf(lo_)) return lo_;
  if (alpha > cdf(hi_)) return hi_;
  double a = std::max(lo_, std::min(lo_guess, hi_));
  double b = std::min(hi_, std::max(hi_guess, lo_));
  if (!(a < b)) {
    a = lo_;
    b = hi_;
  }
  // restore the bracket invariant cdf(a) < alpha <= cdf(b) before refining
  if (cdf(a) >= alpha) a = lo_;
  if (cdf(b) < alpha) b = hi_;
  return refine_quantile(alpha, a, b);
}

DistributionView SmoothedDistribution::view() const {
  DistributionView v;
  v.cdf = [this](double q) { return cdf(q); };
  v.quantile = [this](double a) { return quantile(a); };
  v.quantile_hinted = [this](double a, double lo, double hi) {
    return quantile_in(a, lo, hi);
  };
  v.support_lo = lo_;
  v.support_hi = hi_;
  v.bandwidth = h_;
  return v;
}

SmoothedDistribution smooth_cdf(std::vector<double> data, double bandwidth) {
  return SmoothedDistribution(std::move(data), bandwidth);
}

BandwidthResult cv_bandwidth(std::span<const double> data) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("cv_bandwidth: need n >= 2");

  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < n; ++i)
    if (sorted[i] != sorted[i - 1]) ++distinct;

  double sd = sample_stddev(sorted);
  const double scale = std::max(std::fabs(sorted.back()), 1.0);
  if (!(sd > 0.0)) sd = 1e-8 * scale;  // degenerate data still needs h > 0
  const double rate = sd * std::pow(static_cast<double>(n), -1.0 / 3.0);

  if (distinct < 10) return {rate, true};

  // leave-one-out ISE for the smoothed distribution function, integrated
  // by trapezoid over a fixed data-driven grid (scale-equivariant)
  const std::size_t m = 129;
  const auto xg = linspace(sorted.front() - sd, sorted.back() + sd, m);

  const auto hg_lo = std::log(0.05 * rate);
  const auto hg_hi = std::log(2.0 * rate);
  const auto lg = linspace(hg_lo, hg_hi, 30);

  double best_h = rate, best_cv = 0.0;
  bool have = false;
  const double dn = static_cast<double>(n);
  for (double lh : lg) {
    const double h = std::exp(lh);
    const double reach = kernel_reach * h;
    std::vector<double> integrand(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double x = xg[j];
      const std::size_t a = static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), x - reach) -
          sorted.begin());
      const std::size_t b = static_cast<std::size_t>(
          std::upper_bound(sorted.begin(), sorted.end(), x + reach) -
          sorted.begin());
      const std::size_t below = static_cast<std::size_t>(
          std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
      double sphi = static_cast<double>(a);   // saturated kernels
      double sphi2 = static_cast<double>(a);  // their squares too
      double sind_phi = static_cast<double>(std::min(a, below));
      for (std::size_t i = a; i < b; ++i) {
        const double phi = normal_cdf((x - sorted[i]) / h);
        sphi += phi;
        sphi2 += phi * phi;
        if (sorted[i] <= x) sind_phi += phi;
      }
      const double c = static_cast<double>(below);
      const double A = sphi;  // n * Ghat(x)
      // sum_i ((n-1) 1{Qi<=x} - n Ghat + Phi_i)^2 expanded
      const double t = (dn - 1.0) * (dn - 1.0) * c +
                       2.0 * (dn - 1.0) * sind_phi -
                       2.0 * (dn - 1.0) * A * c + sphi2 - 2.0 * A * A +
                       dn * A * A;
      integrand[j] = t;
    }
    const double cv = trapezoid(xg, integrand) / (dn * (dn - 1.0) * (dn - 1.0));
    if (!have || cv < best_cv) {
      have = true;
      best_cv = cv;
      best_h = h;
    }
  }
  return {best_h, false};
}

DistributionView analytic_distribution(std::function<double(double)> cdf,
                                       double lo, double hi,
                                       std::function<double(double)> quantile) {
  DistributionView v;
  v.support_lo = lo;
  v.support_hi = hi;
  v.cdf = std::move(cdf);
  if (quantile) {
    v.quantile = std::move(quantile);
  } else {
    auto f = v.cdf;
    v.quantile = [f, lo, hi](double a) {
      return invert_monotone(f, lo, hi, a, 1e-10);
    };
  }
  return v;
}

}  // namespace iterfunc
