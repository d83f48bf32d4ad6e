#include "iterfunc/demand_iv.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "iterfunc/numeric.hpp"

namespace iterfunc {

namespace {

int covariate_level(const Sample& s, std::size_t i) {
  return s.has_covariates() ? static_cast<int>(std::llround(s.covariates[i]))
                            : 0;
}

std::vector<int> distinct_levels(const Sample& s) {
  std::set<int> seen;
  for (std::size_t i = 0; i < s.size(); ++i) seen.insert(covariate_level(s, i));
  return {seen.begin(), seen.end()};
}

// per-unit fitted schedule value sum_m theta_m q^m
double per_unit_price(const std::vector<double>& theta, double q) {
  double acc = 0.0;
  for (std::size_t m = theta.size(); m-- > 0;) acc = acc * q + theta[m];
  return acc;
}

}  // namespace

ThetaEstimate iv_estimate_theta(const Sample& s, int degree,
                                const std::vector<int>& active,
                                const std::vector<int>& levels_used) {
  if (degree < 1) throw std::invalid_argument("iv_estimate_theta: degree >= 1");
  if (!s.has_prices())
    throw std::invalid_argument("iv_estimate_theta: sample has no prices");
  const std::size_t n = s.size();
  if (n == 0) throw std::invalid_argument("iv_estimate_theta: empty sample");
  for (double q : s.quantities)
    if (!(q > 0.0))
      throw std::invalid_argument(
          "iv_estimate_theta: quantities must be positive for the per-unit "
          "regression");

  const int d = degree + 1;  // coefficients theta_0 .. theta_degree
  std::vector<int> act = active;
  if (act.empty())
    for (int m = 0; m < d; ++m) act.push_back(m);
  std::sort(act.begin(), act.end());
  act.erase(std::unique(act.begin(), act.end()), act.end());
  for (int m : act)
    if (m < 0 || m >= d)
      throw std::invalid_argument(
          "iv_estimate_theta: active exponent outside 0..degree");
  const int a = static_cast<int>(act.size());

  const std::vector<int> observed = distinct_levels(s);
  std::vector<int> levels = levels_used;
  if (levels.empty()) {
    levels = observed;
  } else {
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (int x : levels)
      if (!std::binary_search(observed.begin(), observed.end(), x))
        throw std::invalid_argument(
            "iv_estimate_theta: requested instrument level not in sample");
  }
  const int l = static_cast<int>(levels.size());
  if (l < a)
    throw std::invalid_argument(
        "iv_estimate_theta: need at least as many covariate levels as free "
        "coefficients");

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(l, a);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(l);
  for (std::size_t i = 0; i < n; ++i) {
    const int x = covariate_level(s, i);
    const auto it = std::lower_bound(levels.begin(), levels.end(), x);
    if (it == levels.end() || *it != x) continue;
    const int row = static_cast<int>(it - levels.begin());
    const double q = s.quantities[i];
    for (int m = 0; m < a; ++m) M(row, m) += std::pow(q, act[m]);
    rhs(row) += s.prices[i] / q;
    counts(row) += 1.0;
  }

  Eigen::VectorXd theta;
  if (l == a) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
      throw std::runtime_error(
          "iv_estimate_theta: singular instrument design");
    theta = lu.solve(rhs);
  } else {
    const Eigen::VectorXd w = counts.cwiseInverse();
    const Eigen::MatrixXd mtw = M.transpose() * w.asDiagonal();
    const Eigen::MatrixXd gram = mtw * M;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
      throw std::runtime_error(
          "iv_estimate_theta: rank-deficient projected design");
    theta = lu.solve(mtw * rhs);
  }

  ThetaEstimate out;
  out.theta.assign(d, 0.0);
  for (int m = 0; m < a; ++m) out.theta[act[m]] = theta(m);
  for (double t : out.theta)
    if (!std::isfinite(t))
      throw std::runtime_error("iv_estimate_theta: non-finite coefficients");
  out.basis_degree = d;
  out.instrument_levels = l;
  out.fitted_period = s.period;
  out.fitted_exponents = std::move(act);
  return out;
}

ThetaEstimate iv_estimate_theta_anchored(const Sample& s, int degree,
                                         double intercept,
                                         const std::vector<int>& active) {
  if (degree < 1)
    throw std::invalid_argument("iv_estimate_theta_anchored: degree >= 1");
  if (!s.has_prices())
    throw std::invalid_argument(
        "iv_estimate_theta_anchored: sample has no prices");
  if (!std::isfinite(intercept))
    throw std::invalid_argument(
        "iv_estimate_theta_anchored: intercept not finite");
  const std::size_t n = s.size();
  if (n == 0)
    throw std::invalid_argument("iv_estimate_theta_anchored: empty sample");
  for (double q : s.quantities)
    if (!(q > 0.0))
      throw std::invalid_argument(
          "iv_estimate_theta_anchored: quantities must be positive for the "
          "per-unit regression");

  const int d = degree + 1;
  std::vector<int> act = active;
  if (act.empty())
    for (int m = 0; m < d; ++m) act.push_back(m);
  std::sort(act.begin(), act.end());
  act.erase(std::unique(act.begin(), act.end()), act.end());
  if (act.empty() || act.front() != 0)
    throw std::invalid_argument(
        "iv_estimate_theta_anchored: active set must contain exponent 0");
  if (act.back() >= d)
    throw std::invalid_argument(
        "iv_estimate_theta_anchored: active exponent outside 0..degree");
  const int a = static_cast<int>(act.size()) - 1;  // free slope terms
  if (a == 0) {
    ThetaEstimate out;
    out.theta.assign(d, 0.0);
    out.theta[0] = intercept;
    out.basis_degree = d;
    out.instrument_levels = static_cast<int>(distinct_levels(s).size());
    out.fitted_period = s.period;
    out.fitted_exponents = std::move(act);
    return out;
  }

  const std::vector<int> levels = distinct_levels(s);
  const int l = static_cast<int>(levels.size());
  if (l < a)
    throw std::invalid_argument(
        "iv_estimate_theta_anchored: need at least as many covariate levels "
        "as free coefficients");

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(l, a);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(l);
  for (std::size_t i = 0; i < n; ++i) {
    const int x = covariate_level(s, i);
    const auto it = std::lower_bound(levels.begin(), levels.end(), x);
    const int row = static_cast<int>(it - levels.begin());
    const double q = s.quantities[i];
    for (int m = 0; m < a; ++m) M(row, m) += std::pow(q, act[m + 1]);
    rhs(row) += s.prices[i] / q - intercept;
    counts(row) += 1.0;
  }

  Eigen::VectorXd theta;
  if (l == a) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
      throw std::runtime_error(
          "iv_estimate_theta_anchored: singular instrument design");
    theta = lu.solve(rhs);
  } else {
    const Eigen::VectorXd w = counts.cwiseInverse();
    const Eigen::MatrixXd mtw = M.transpose() * w.asDiagonal();
    const Eigen::MatrixXd gram = mtw * M;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
      throw std::runtime_error(
          "iv_estimate_theta_anchored: rank-deficient projected design");
    theta = lu.solve(mtw * rhs);
  }

  ThetaEstimate out;
  out.theta.assign(d, 0.0);
  out.theta[0] = intercept;
  for (int m = 0; m < a; ++m) out.theta[act[m + 1]] = theta(m);
  for (double t : out.theta)
    if (!std::isfinite(t))
      throw std::runtime_error(
          "iv_estimate_theta_anchored: non-finite coefficients");
  out.basis_degree = d;
  out.instrument_levels = l;
  out.fitted_period = s.period;
  out.fitted_exponents = std::move(act);
  return out;
}

ThetaEstimate ols_estimate_theta(const Sample& s, int degree) {
  if (degree < 1) throw std::invalid_argument("ols_estimate_theta: degree >= 1");
  if (!s.has_prices())
    throw std::invalid_argument("ols_estimate_theta: sample has no prices");
  const std::size_t n = s.size();
  const int d = degree + 1;
  if (n < static_cast<std::size_t>(d))
    throw std::invalid_argument("ols_estimate_theta: too few observations");
  for (double q : s.quantities)
    if (!(q > 0.0))
      throw std::invalid_argument(
          "ols_estimate_theta: quantities must be positive for the per-unit "
          "regression");

  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = s.quantities[i];
    double qm = 1.0;
    for (int m = 0; m < d; ++m) {
      X(i, m) = qm;
      qm *= q;
    }
    y(i) = s.prices[i] / q;
  }
  const Eigen::VectorXd theta = X.householderQr().solve(y);

  ThetaEstimate out;
  out.theta.assign(theta.data(), theta.data() + d);
  for (double t : out.theta)
    if (!std::isfinite(t))
      throw std::runtime_error("ols_estimate_theta: non-finite coefficients");
  out.basis_degree = d;
  out.instrument_levels = 0;
  out.fitted_period = s.period;
  return out;
}

std::vector<double> price_residuals(const ThetaEstimate& th, const Sample& s) {
  if (!s.has_prices())
    throw std::invalid_argument("price_residuals: sample has no prices");
  std::vector<double> eta(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double q = s.quantities[i];
    if (!(q > 0.0))
      throw std::invalid_argument("price_residuals: quantities must be > 0");
    eta[i] = s.prices[i] / q - per_unit_price(th.theta, q);
  }
  return eta;
}

std::vector<double> structural_residuals(
    const std::function<double(double, int)>& u_prime, const ThetaEstimate& th,
    const Sample& s) {
  std::vector<double> zeta(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double q = s.quantities[i];
    const int x = covariate_level(s, i);
    zeta[i] = -(u_prime(q, x) - poly_slope(th.theta, q));
  }
  return zeta;
}

std::vector<double> conditional_cdf_epsilon(const std::vector<double>& eps,
                                            const std::vector<double>& x_values,
                                            int level,
                                            const std::vector<double>& grid) {
  if (eps.size() != x_values.size())
    throw std::invalid_argument("conditional_cdf_epsilon: length mismatch");
  std::vector<double> at_level;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (static_cast<int>(std::llround(x_values[i])) == level)
      at_level.push_back(eps[i]);
  if (at_level.size() < 20)
    throw std::invalid_argument(
        "conditional_cdf_epsilon: fewer than 20 observations at the level");
  std::sort(at_level.begin(), at_level.end());
  std::vector<double> out(grid.size());
  const double nx = static_cast<double>(at_level.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto it =
        std::upper_bound(at_level.begin(), at_level.end(), grid[j]);
    out[j] = static_cast<double>(it - at_level.begin()) / nx;
  }
  return out;
}

double r_hat_from_theta(const ThetaEstimate& th1, const ThetaEstimate& th2,
                        const std::function<double(double)>& base_quantile,
                        double alpha, int base, double tau1, double tau2) {
  if (base != 1 && base != 2)
    throw std::invalid_argument("r_hat_from_theta: base must be 1 or 2");
  const double q = base_quantile(alpha);
  const double d1 = tau1 * poly_slope(th1.theta, q);
  const double d2 = tau2 * poly_slope(th2.theta, q);
  return base == 2 ? d1 - d2 : d2 - d1;
}

StratifiedEstimate run_stratified_estimate(const Sample& s1, const Sample& s2,
                                           const EstimationConfig& cfg,
                                           int degree,
                                           const std::vector<int>& active1,
                                           const std::vector<int>& active2,
                                           bool share_intercept,
                                           const std::vector<int>& levels2) {
  if (!s1.has_covariates() || !s2.has_covariates())
    throw std::invalid_argument(
        "run_stratified_estimate: both samples need covariates");
  StratifiedEstimate out;
  if (share_intercept) {
    // period 2's level means spread the wider, so its fit pins the common
    // intercept and period 1 keeps only its slope moments
    out.th2 = iv_estimate_theta(s2, degree, active2, levels2);
    out.th1 =
        iv_estimate_theta_anchored(s1, degree, out.th2.theta[0], active1);
  } else {
    out.th1 = iv_estimate_theta(s1, degree, active1);
    out.th2 = iv_estimate_theta(s2, degree, active2, levels2);
  }
  if (!(std::fabs(out.th1.theta[0]) > 1e-12))
    throw std::runtime_error(
        "run_stratified_estimate: period-1 marginal price at zero vanishes");
  out.tau1 = out.th2.theta[0] / out.th1.theta[0];

  PriceSchedule p1 = PriceSchedule::polynomial(out.th1.theta);
  PriceSchedule p2 = PriceSchedule::polynomial(out.th2.theta);
  p1.tau = out.tau1;
  p2.tau = 1.0;

  const std::vector<int> xs2 = distinct_levels(s2);
  const std::vector<int> xs1 = distinct_levels(s1);

  auto stratum = [](const Sample& s, int level) {
    Sample sub;
    sub.period = s.period;
    sub.normalized = s.normalized;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (covariate_level(s, i) == level)
        sub.quantities.push_back(s.quantities[i]);
    return sub;
  };

  std::map<int, LinearInterp> uprime_by_x;
  for (int x : xs2) {
    if (!std::binary_search(xs1.begin(), xs1.end(), x))
      throw std::runtime_error(
          "run_stratified_estimate: covariate level missing from period 1");
    const Sample sub1 = stratum(s1, x);
    const Sample sub2 = stratum(s2, x);
    const PointEstimate pe = run_point_estimate(sub1, sub2, p1, p2, cfg,
                                                /*with_residual=*/false,
                                                /*with_elasticity=*/false);
    out.lambda_by_x.emplace(x, pe.lambda);
    out.utility_by_x.emplace(x, pe.utility);
    uprime_by_x.emplace(x,
                        LinearInterp(pe.utility.q_grid, pe.utility.u_prime));
  }

  const auto u_prime_fn = [&uprime_by_x](double q, int x) {
    const auto it = uprime_by_x.find(x);
    if (it == uprime_by_x.end())
      throw std::runtime_error(
          "structural residuals: covariate level has no fitted utility");
    return it->second(q);
  };
  const std::vector<double> zeta =
      structural_residuals(u_prime_fn, out.th2, s2);
  const std::vector<double> eta = price_residuals(out.th2, s2);
  out.eps_hat.resize(s2.size());
  for (std::size_t i = 0; i < s2.size(); ++i)
    out.eps_hat[i] = zeta[i] + eta[i];

  const auto [mn, mx] =
      std::minmax_element(out.eps_hat.begin(), out.eps_hat.end());
  double lo = *mn, hi = *mx;
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  out.eps_grid = linspace(lo, hi, 101);
  for (int x : xs2)
    out.cdf_by_x.emplace(
        x, conditional_cdf_epsilon(out.eps_hat, s2.covariates, x,
                                   out.eps_grid));
  return out;
}

}  // namespace iterfunc
