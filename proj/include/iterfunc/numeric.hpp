#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace iterfunc {

inline constexpr double inv_sqrt2 = 0.70710678118654752440;
inline constexpr double inv_sqrt2pi = 0.39894228040143267794;

//! Standard normal CDF via the complementary error function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * inv_sqrt2); }

inline double normal_pdf(double x) { return inv_sqrt2pi * std::exp(-0.5 * x * x); }

//! Inverse standard normal CDF (Wichura's rational approximations).
//! Accurate to ~1e-15 on (0,1); throws outside.
double inverse_normal_cdf(double p);

std::vector<double> linspace(double a, double b, std::size_t m);

//! Population variance (divides by m, not m-1).
double grid_variance(std::span<const double> v);

double sample_stddev(std::span<const double> v);

//! Trapezoid integral of y over x (both same length, x ascending).
double trapezoid(std::span<const double> x, std::span<const double> y);

//! Cumulative trapezoid integral; out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> x,
                                         std::span<const double> y);

//! Smallest q in [lo, hi] with f(q) >= target, for nondecreasing f.
//! Bisection with optional derivative-based refinement; the result is
//! accurate to xtol in the argument.  Values of target outside the range
//! of f clamp to the corresponding endpoint.
double invert_monotone(const std::function<double(double)>& f, double lo,
                       double hi, double target, double xtol,
                       const std::function<double(double)>& df = nullptr);

//! Root of f on [lo, hi] by bisection; requires a sign change (or a zero
//! endpoint).  Accurate to xtol in the argument.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double xtol);

//! L2 projection onto the nondecreasing cone (pool adjacent violators).
std::vector<double> isotonic_nondecreasing(std::span<const double> v);

//! Piecewise-linear interpolation over an ascending grid.  Queries outside
//! the grid clamp to the end values unless extrapolation is configured by
//! the caller.
class LinearInterp {
 public:
  LinearInterp() = default;
  LinearInterp(std::vector<double> x, std::vector<double> y);
  double operator()(double q) const;
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_, y_;
};

//! Run fn(i) for i in [0, count).  Serial when max_threads <= 1 or the
//! machine has a single core; results must be written to per-index slots so
//! scheduling cannot affect output.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned max_threads = 0);

}  // namespace iterfunc
