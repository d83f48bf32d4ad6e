#include "iterfunc/numeric.hpp"

#include <algorithm>
#include <thread>

namespace iterfunc {

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("inverse_normal_cdf: p must lie in (0,1)");
  const double q = p - 0.5;
  double r, num, den;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    num = q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                    6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                  1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    den = ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
              5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
            4.2313330701600911252e1) * r + 1.0;
    return num / den;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0;
    den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0;
  } else {
    r -= 5.0;
    num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0;
    den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0;
  }
  const double val = num / den;
  return q < 0.0 ? -val : val;
}

std::vector<double> linspace(double a, double b, std::size_t m) {
  if (m == 0) return {};
  if (m == 1) return {a};
  std::vector<double> out(m);
  const double step = (b - a) / static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) out[i] = a + step * static_cast<double>(i);
  out.back() = b;
  return out;
}

double grid_variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("trapezoid: mismatched lengths");
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

std::vector<double> cumulative_trapezoid(std::span<const double> x,
                                         std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("cumulative_trapezoid: mismatched lengths");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

double invert_monotone(const std::function<double(double)>& f, double lo,
                       double hi, double target, double xtol,
                       const std::function<double(double)>& df) {
  if (!(lo <= hi)) throw std::invalid_argument("invert_monotone: empty bracket");
  if (f(lo) >= target) return lo;
  if (f(hi) < target) return hi;
  // invariant: f(a) < target <= f(b)
  double a = lo, b = hi;
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200 && b - a > xtol; ++it) {
    double fx = f(x);
    if (fx >= target)
      b = x;
    else
      a = x;
    double next = 0.5 * (a + b);
    if (df) {
      // Newton step from the last evaluation, kept only when it stays
      // well inside the bracket; otherwise plain bisection.
      const double d = df(x);
      if (d > 0.0) {
        const double cand = x - (fx - target) / d;
        if (cand > a && cand < b) next = cand;
      }
    }
    x = next;
  }
  return b;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double xtol) {
  double fa = f(lo), fb = f(hi);
  if (fa == 0.0) return lo;
  if (fb == 0.0) return hi;
  if ((fa > 0.0) == (fb > 0.0))
    throw std::invalid_argument("bisect_root: no sign change on bracket");
  double a = lo, b = hi;
  while (b - a > xtol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> isotonic_nondecreasing(std::span<const double> v) {
  std::vector<double> level, weight;
  level.reserve(v.size());
  weight.reserve(v.size());
  for (double x : v) {
    level.push_back(x);
    weight.push_back(1.0);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const double w = weight[weight.size() - 2] + weight.back();
      const double m = (level[level.size() - 2] * weight[weight.size() - 2] +
                        level.back() * weight.back()) / w;
      level.pop_back();
      weight.pop_back();
      level.back() = m;
      weight.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t b = 0; b < level.size(); ++b)
    for (std::size_t k = 0; k < static_cast<std::size_t>(weight[b] + 0.5); ++k)
      out.push_back(level[b]);
  return out;
}

LinearInterp::LinearInterp(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size() || x_.size() < 2)
    throw std::invalid_argument("LinearInterp: need two or more nodes");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1]))
      throw std::invalid_argument("LinearInterp: grid must be ascending");
}

double LinearInterp::operator()(double q) const {
  if (q <= x_.front()) return y_.front();
  if (q >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), q);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin());
  const double t = (q - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return y_[i - 1] + t * (y_[i] - y_[i - 1]);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned max_threads) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  unsigned threads = max_threads == 0 ? hw : std::min(hw, max_threads);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  threads = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace iterfunc
