#include "iterfunc/simulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "iterfunc/demand_iv.hpp"
#include "iterfunc/numeric.hpp"
#include "iterfunc/pipeline.hpp"
#include "iterfunc/solver.hpp"

namespace iterfunc {

namespace {

// lower-tail mass of nine trials below five successes, as a polynomial in
// the success rate; shows up in the second design's marginal price
double binom9_tail(double q) {
  static const double c[5] = {1.0, 9.0, 36.0, 84.0, 126.0};
  const double p = 1.0 - q;
  double acc = 0.0;
  double qk = 1.0;
  for (int k = 0; k <= 4; ++k) {
    acc += c[k] * qk * std::pow(p, 9 - k);
    qk *= q;
  }
  return acc;
}

double binom9_tail_deriv(double q) {
  const double t = q * (1.0 - q);
  return -630.0 * t * t * t * t;
}

}  // namespace

DesignId parse_design(const std::string& name) {
  if (name == "1" || name == "one") return DesignId::one;
  if (name == "2" || name == "two") return DesignId::two;
  if (name == "appendix" || name == "3") return DesignId::appendix;
  throw std::invalid_argument("unknown design '" + name +
                              "' (expected 1, 2, or appendix)");
}

std::string design_name(DesignId id) {
  switch (id) {
    case DesignId::one: return "1";
    case DesignId::two: return "2";
    default: return "appendix";
  }
}

PriceSchedule design1_p1() {
  PriceSchedule p = PriceSchedule::closed_form(
      [](double q) { return q - q * q / 2.0 + q * q * q / 6.0; },
      [](double q) { return 1.0 - q + q * q / 2.0; },
      [](double q) { return -1.0 + q; });
  p.tau = 2.0;
  return p;
}

PriceSchedule design1_p2() {
  PriceSchedule p = PriceSchedule::closed_form(
      [](double q) { return 2.0 * q - q * q / 2.0; },
      [](double q) { return 2.0 - q; }, [](double) { return -1.0; });
  p.tau = 1.0;
  return p;
}

PriceSchedule design2_p1() {
  // only the derivative has a stated form; the level is integrated once on
  // a fixed fine grid and cached
  static const std::vector<double> grid = linspace(0.0, 2.0, 4097);
  static const std::vector<double> level = [] {
    std::vector<double> slope(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      slope[i] = 0.5 * (1.0 + binom9_tail(grid[i]));
    return cumulative_trapezoid(grid, slope);
  }();
  static const LinearInterp price(grid, level);
  PriceSchedule p = PriceSchedule::closed_form(
      [](double q) { return price(q); },
      [](double q) { return 0.5 * (1.0 + binom9_tail(q)); },
      [](double q) { return 0.5 * binom9_tail_deriv(q); });
  p.tau = 2.0;
  return p;
}

PriceSchedule design2_p2() { return design1_p2(); }

PriceSchedule appendix_p1() {
  PriceSchedule p = PriceSchedule::polynomial({2.0, -0.5, 0.0});
  p.tau = 1.0;
  return p;
}

PriceSchedule appendix_p2() {
  PriceSchedule p = PriceSchedule::polynomial({2.0, 0.0, -1.0 / 3.0});
  p.tau = 1.0;
  return p;
}

DesignSpec make_design_spec(DesignId id, int n, std::uint64_t seed) {
  if (n < 50) throw std::invalid_argument("make_design_spec: n >= 50");
  DesignSpec spec;
  spec.design_id = id;
  spec.n = n;
  spec.seed = seed;
  if (id == DesignId::appendix) {
    spec.true_lambda = [](double a) { return std::pow(a, 1.0); };
    // per-level type quantile: alpha^{(2+x)/3}
    spec.true_utility = [](double q, int x) {
      return 2.0 * q - q * q / 2.0 -
             std::pow(q, 2.0 + x) / (2.0 + static_cast<double>(x));
    };
    spec.true_cdf_eps = [](double e, int x) {
      const double c = std::clamp(e, 0.0, 1.0);
      return std::pow(c, 3.0 / (2.0 + static_cast<double>(x)));
    };
  } else {
    spec.true_lambda = [](double a) { return std::pow(a, 2.0 / 3.0); };
    spec.true_utility = [](double q, int) { return 2.0 * q - q * q; };
    spec.true_cdf_eps = [](double e, int) {
      const double c = std::clamp(e, 0.0, 1.0);
      return std::pow(c, 1.5);
    };
  }
  return spec;
}

std::pair<Sample, Sample> gen_design1(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("gen_design1: n >= 1");
  Sample s1, s2;
  s1.period = 1;
  s2.period = 2;
  s1.normalized = s2.normalized = true;
  s1.quantities.reserve(n);
  s2.quantities.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double eps = std::pow(rng.uniform(), 2.0 / 3.0);
    s1.quantities.push_back(std::sqrt(eps));
  }
  for (int i = 0; i < n; ++i) {
    const double eps = std::pow(rng.uniform(), 2.0 / 3.0);
    s2.quantities.push_back(eps);
  }
  return {std::move(s1), std::move(s2)};
}

std::pair<Sample, Sample> gen_design2(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("gen_design2: n >= 1");
  Sample s1, s2;
  s1.period = 1;
  s2.period = 2;
  s1.normalized = s2.normalized = true;
  s1.quantities.reserve(n);
  s2.quantities.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double eps = std::pow(rng.uniform(), 2.0 / 3.0);
    // first-order condition 2q + B(q) - 1 = eps; endpoints bracket since
    // the left side runs from 0 to 1
    const double q = bisect_root(
        [eps](double t) { return 2.0 * t + binom9_tail(t) - 1.0 - eps; }, 0.0,
        1.0, 1e-12);
    s1.quantities.push_back(q);
  }
  for (int i = 0; i < n; ++i) {
    const double eps = std::pow(rng.uniform(), 2.0 / 3.0);
    s2.quantities.push_back(eps);
  }
  return {std::move(s1), std::move(s2)};
}

std::pair<Sample, Sample> gen_appendix_design(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("gen_appendix_design: n >= 1");
  const PriceSchedule psi1 = appendix_p1();
  const PriceSchedule psi2 = appendix_p2();

  auto draw_sample = [&](int period) {
    Sample s;
    s.period = period;
    s.normalized = true;
    s.quantities.reserve(n);
    s.prices.reserve(n);
    s.covariates.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double ux = rng.uniform();
      int x;
      if (period == 1)
        x = ux < 1.0 / 3.0 ? 0 : (ux < 2.0 / 3.0 ? 1 : 2);
      else
        x = ux < 5.0 / 12.0 ? 0 : (ux < 0.75 ? 1 : 2);
      const double eps =
          std::pow(rng.uniform(), (2.0 + static_cast<double>(x)) / 3.0);
      const double eta = rng.normal(0.0, 0.05);
      double q;
      if (period == 1) {
        q = std::pow(eps, 1.0 / (1.0 + static_cast<double>(x)));
      } else if (x == 0) {
        q = 1.0 - std::sqrt(1.0 - eps);
      } else if (x == 1) {
        q = eps;
      } else {
        q = bisect_root(
            [eps](double t) { return ((t - 1.0) * t + 1.0) * t - eps; }, 0.0,
            1.0, 1e-12);
      }
      const PriceSchedule& psi = period == 1 ? psi1 : psi2;
      s.quantities.push_back(q);
      s.prices.push_back(psi.price(q) + q * eta);
      s.covariates.push_back(static_cast<double>(x));
    }
    return s;
  };

  Sample s1 = draw_sample(1);
  Sample s2 = draw_sample(2);
  return {std::move(s1), std::move(s2)};
}

TikhonovResult tikhonov_comparator(const std::function<double(double)>& r,
                                   const std::function<double(double)>& beta,
                                   double rho, int m) {
  if (!(rho > 0.0)) throw std::invalid_argument("tikhonov: rho > 0");
  if (m < 50) throw std::invalid_argument("tikhonov: m >= 50");

  TikhonovResult out;
  out.grid = linspace(0.0, 1.0, static_cast<std::size_t>(m));
  const double h = 1.0 / static_cast<double>(m - 1);

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rv(m);
  for (int i = 0; i < m; ++i) {
    const double a = out.grid[i];
    rv(i) = r(a);
    const double b = std::clamp(beta(a), 0.0, 1.0);
    if (b == a) continue;
    const double sign = b > a ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    int k0 = static_cast<int>(std::floor(lo / h));
    if (k0 >= m - 1) k0 = m - 2;
    for (int k = k0; k < m - 1; ++k) {
      const double cell_lo = out.grid[k], cell_hi = out.grid[k + 1];
      if (cell_lo >= hi) break;
      const double x0 = std::max(lo, cell_lo);
      const double x1 = std::min(hi, cell_hi);
      if (x1 <= x0) continue;
      const double t0 = (x0 - cell_lo) / h, t1 = (x1 - cell_lo) / h;
      const double len = x1 - x0;
      // integral of the piecewise-linear interpolant over [x0, x1]
      K(i, k) += sign * len * 0.5 * ((1.0 - t0) + (1.0 - t1));
      K(i, k + 1) += sign * len * 0.5 * (t0 + t1);
    }
  }

  Eigen::VectorXd w(m);
  for (int i = 0; i < m; ++i) w(i) = (i == 0 || i == m - 1) ? h / 2.0 : h;
  const Eigen::VectorXd ws = w.cwiseSqrt();
  // symmetrized operator under the trapezoid inner product
  Eigen::MatrixXd S = ws.asDiagonal() * K * ws.cwiseInverse().asDiagonal();
  Eigen::MatrixXd A = S.transpose() * S;
  A.diagonal().array() += rho;
  const Eigen::VectorXd rhs = S.transpose() * ws.cwiseProduct(rv);
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("tikhonov: regularized system not positive definite");
  const Eigen::VectorXd mu = llt.solve(rhs);
  const Eigen::VectorXd lam = mu.cwiseQuotient(ws);

  // residual of the normal equations in the original (unweighted) variables
  const Eigen::MatrixXd kstar =
      w.cwiseInverse().asDiagonal() * K.transpose() * w.asDiagonal();
  const Eigen::VectorXd resid =
      rho * lam + kstar * (K * lam) - kstar * rv;
  out.solve_residual_sup = resid.cwiseAbs().maxCoeff();

  out.lambda_density.assign(lam.data(), lam.data() + m);
  out.lambda = cumulative_trapezoid(out.grid, out.lambda_density);
  return out;
}

namespace {

struct Accum {
  double sum = 0.0, sumsq = 0.0;
  int count = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++count;
  }
  double mean() const { return sum / std::max(count, 1); }
  double var() const {
    const double m = mean();
    return std::max(0.0, sumsq / std::max(count, 1) - m * m);
  }
};

}  // namespace

MetricsTable run_monte_carlo(DesignId design, int n, int reps,
                             const EstimationConfig& cfg) {
  cfg.validate();
  if (reps < 10) throw std::invalid_argument("run_monte_carlo: reps >= 10");
  if (n < 50) throw std::invalid_argument("run_monte_carlo: n >= 50");

  const DesignSpec spec = make_design_spec(design, n, cfg.seed);
  const std::vector<double> agrid = cfg.alpha_grid();

  int failures = 0;
  std::string first_error;
  MetricsTable table;
  const std::string dn = design_name(design);

  if (design == DesignId::appendix) {
    const std::vector<double> true_th1 = {2.0, -0.5, 0.0};
    const std::vector<double> true_th2 = {2.0, 0.0, -1.0 / 3.0};
    Accum th_err[2][3];
    Accum fsup[3];
    Accum tau_err;
    for (int rep = 0; rep < reps; ++rep) {
      try {
        RngStream rng(cfg.seed, stream_mc_rep, static_cast<std::uint64_t>(rep));
        const auto [s1, s2] = gen_appendix_design(n, rng);
        // the reference table pins the structurally absent coefficient of
        // each schedule at zero; freeing it makes the level-mean moment
        // matrix nearly singular and swamps the fit with noise.  The
        // intercept is pooled across periods: period 1's level means of Q
        // barely spread, so on its own its intercept is several times
        // noisier than the schedules warrant.  The pooled fit uses the two
        // lowest covariate levels, making the moment system square and the
        // solve exact; the third level pairs badly with level 1 (their means
        // of Q^2 nearly coincide) and adding it to the pair changes little
        // except the weighting.
        const StratifiedEstimate est =
            run_stratified_estimate(s1, s2, cfg, 2, {0, 1}, {0, 2}, true,
                                    {0, 1});
        for (int k = 0; k < 3; ++k) {
          th_err[0][k].add(est.th1.theta[k] - true_th1[k]);
          th_err[1][k].add(est.th2.theta[k] - true_th2[k]);
        }
        tau_err.add(std::fabs(est.tau1 - 1.0));
        for (int x = 0; x < 3; ++x) {
          const auto it = est.cdf_by_x.find(x);
          if (it == est.cdf_by_x.end())
            throw std::runtime_error("missing covariate level in replicate");
          double sup = 0.0;
          for (std::size_t j = 0; j < est.eps_grid.size(); ++j)
            sup = std::max(sup, std::fabs(it->second[j] -
                                          spec.true_cdf_eps(est.eps_grid[j], x)));
          fsup[x].add(sup);
        }
      } catch (const std::exception& e) {
        ++failures;
        if (first_error.empty()) first_error = e.what();
      }
    }
    if (failures * 20 > reps)
      throw std::runtime_error("run_monte_carlo: " + std::to_string(failures) +
                               " of " + std::to_string(reps) +
                               " reps failed (first: " + first_error + ")");
    const int ok = reps - failures;
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k) {
        const std::string base =
            "theta" + std::to_string(j + 1) + std::to_string(k);
        table.push_back({dn, n, ok, base + "_rmse",
                         std::sqrt(th_err[j][k].sumsq /
                                   std::max(th_err[j][k].count, 1))});
        table.push_back({dn, n, ok, base + "_bias", th_err[j][k].mean()});
        table.push_back(
            {dn, n, ok, base + "_std", std::sqrt(th_err[j][k].var())});
      }
    for (int x = 0; x < 3; ++x)
      table.push_back({dn, n, ok, "fcond_sup_mean_x" + std::to_string(x),
                       fsup[x].mean()});
    table.push_back({dn, n, ok, "tau1_abs_err_mean", tau_err.mean()});
    return table;
  }

  // designs 1 and 2: known schedules
  const PriceSchedule p1 = design == DesignId::one ? design1_p1() : design2_p1();
  const PriceSchedule p2 = design == DesignId::one ? design1_p2() : design2_p2();
  const bool with_tik = design == DesignId::one;

  Accum lam_sup, u_sup, tau_err, lam_dev, tik_sup, tik_dev;
  for (int rep = 0; rep < reps; ++rep) {
    try {
      RngStream rng(cfg.seed, stream_mc_rep, static_cast<std::uint64_t>(rep));
      const auto [s1, s2] = design == DesignId::one ? gen_design1(n, rng)
                                                    : gen_design2(n, rng);
      const PointEstimate pe =
          run_point_estimate(s1, s2, p1, p2, cfg, /*with_residual=*/false,
                             /*with_elasticity=*/false);

      double sup = 0.0, dev = 0.0;
      for (std::size_t i = 0; i < agrid.size(); ++i) {
        const double d = pe.lambda.lambda[i] - spec.true_lambda(agrid[i]);
        sup = std::max(sup, std::fabs(d));
        dev += d;
      }
      lam_sup.add(sup);
      lam_dev.add(dev / static_cast<double>(agrid.size()));

      double usup = 0.0;
      for (std::size_t i = 0; i < pe.q_grid.size(); ++i)
        usup = std::max(usup, std::fabs(pe.utility.u_values[i] -
                                        spec.true_utility(pe.q_grid[i], 0)));
      u_sup.add(usup);
      tau_err.add(std::fabs(pe.orientation.tau1 - 2.0));

      if (with_tik) {
        SmoothedDistribution g1(s1.quantities, pe.h1.h);
        SmoothedDistribution g2(s2.quantities, pe.h2.h);
        const SolverInputs in =
            make_solver_inputs(g1.view(), g2.view(), p1, p2);
        // the whole design is one segment; reuse its base
        const int base = pe.orientation.base();
        const DistributionView& vb = base == 1 ? in.g1 : in.g2;
        const DistributionView& vo = base == 1 ? in.g2 : in.g1;
        const auto r_fn = [&](double a) { return r_eval(in, base, a); };
        const auto b_fn = [&](double a) { return beta_step(vb, vo, a); };
        // fixed light ridge: tying rho to the iteration count puts it two
        // orders of magnitude too high and over-smooths the comparator
        const double rho = 1e-4;
        const TikhonovResult tik = tikhonov_comparator(r_fn, b_fn, rho, 200);
        const LinearInterp tl(tik.grid, tik.lambda);
        double tsup = 0.0, tdev = 0.0;
        for (std::size_t i = 0; i < agrid.size(); ++i) {
          const double d = tl(agrid[i]) - spec.true_lambda(agrid[i]);
          tsup = std::max(tsup, std::fabs(d));
          tdev += d;
        }
        tik_sup.add(tsup);
        tik_dev.add(tdev / static_cast<double>(agrid.size()));
      }
    } catch (const std::exception& e) {
      ++failures;
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (failures * 20 > reps)
    throw std::runtime_error("run_monte_carlo: " + std::to_string(failures) +
                             " of " + std::to_string(reps) +
                             " reps failed (first: " + first_error + ")");
  const int ok = reps - failures;
  table.push_back({dn, n, ok, "lambda_sup_mean", lam_sup.mean()});
  table.push_back({dn, n, ok, "utility_sup_mean", u_sup.mean()});
  table.push_back({dn, n, ok, "tau1_abs_err_mean", tau_err.mean()});
  table.push_back({dn, n, ok, "lambda_bias_abs", std::fabs(lam_dev.mean())});
  if (with_tik) {
    table.push_back({dn, n, ok, "tik_sup_mean", tik_sup.mean()});
    table.push_back({dn, n, ok, "tik_bias_abs", std::fabs(tik_dev.mean())});
  }
  return table;
}

void write_metrics_csv(const MetricsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "design,n,reps,metric,value\n";
  char buf[64];
  for (const auto& row : table) {
    std::snprintf(buf, sizeof buf, "%.17g", row.value);
    out << row.design << ',' << row.n << ',' << row.reps << ',' << row.metric
        << ',' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace iterfunc
