// Command-line front end: simulate / estimate / bootstrap / elasticity /
// montecarlo.  All numeric output is printed with %.17g so repeated runs
// with the same seed and configuration are byte-identical.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iterfunc/bootstrap.hpp"
#include "iterfunc/demand_iv.hpp"
#include "iterfunc/pipeline.hpp"
#include "iterfunc/simulation.hpp"

namespace {

using namespace iterfunc;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CommonOpts {
  std::string sample1, sample2, config, out_dir, design;
  std::uint64_t seed = 0;
  int n = 0, reps = 0, bootstrap_reps = 0, grid_points = 0;
  bool has_seed = false, has_grid_points = false, has_bootstrap_reps = false;
};

std::filesystem::path resolve_out_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    if (const char* env = std::getenv("ITERFUNC_OUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);
  return dir;
}

EstimationConfig build_config(const CommonOpts& o) {
  EstimationConfig cfg;
  if (!o.config.empty()) cfg = load_config(o.config);
  // command-line flags override file settings
  if (o.has_seed) apply_config_entry(cfg, "seed", std::to_string(o.seed));
  if (o.has_grid_points)
    apply_config_entry(cfg, "grid_points", std::to_string(o.grid_points));
  if (o.has_bootstrap_reps)
    apply_config_entry(cfg, "bootstrap_reps",
                       std::to_string(o.bootstrap_reps));
  cfg.validate();
  return cfg;
}

//! Zero-dropping as usual, but samples that carry prices keep their
//! original quantity units: shifting the support would detach the
//! observations from the recorded schedule.
Sample prepare_sample(Sample s, int period) {
  s.period = period;
  Sample out = normalize_sample(std::move(s));
  if (out.has_prices() && out.shift > 0.0) {
    for (auto& q : out.quantities) q += out.shift;
    out.shift = 0.0;
  }
  return out;
}

//! Price schedules for the estimation commands, in order of preference:
//! a named simulation design, coefficients from the configuration file,
//! covariate-instrumented fits, plain least squares.
std::pair<PriceSchedule, PriceSchedule> resolve_schedules(
    const CommonOpts& o, const EstimationConfig& cfg, const Sample& s1,
    const Sample& s2) {
  if (!o.design.empty()) {
    switch (parse_design(o.design)) {
      case DesignId::one:
        return {design1_p1(), design1_p2()};
      case DesignId::two:
        return {design2_p1(), design2_p2()};
      case DesignId::appendix:
        return {appendix_p1(), appendix_p2()};
    }
  }
  if (!cfg.theta1.empty() && !cfg.theta2.empty())
    return {PriceSchedule::polynomial(cfg.theta1),
            PriceSchedule::polynomial(cfg.theta2)};
  if (s1.has_prices() && s2.has_prices()) {
    if (s1.has_covariates() && s2.has_covariates())
      return {PriceSchedule::polynomial(iv_estimate_theta(s1, 2).theta),
              PriceSchedule::polynomial(iv_estimate_theta(s2, 2).theta)};
    return {PriceSchedule::polynomial(ols_estimate_theta(s1, 2).theta),
            PriceSchedule::polynomial(ols_estimate_theta(s2, 2).theta)};
  }
  throw std::runtime_error(
      "no price information: pass --design, set theta1/theta2 in the "
      "config, or provide price columns in both samples");
}

void write_grid(const std::filesystem::path& path,
                const std::vector<double>& point,
                const std::vector<double>& estimate,
                const std::vector<double>* lo = nullptr,
                const std::vector<double>* hi = nullptr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "point,estimate,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < point.size(); ++i) {
    out << fmt(point[i]) << ',' << fmt(estimate[i]) << ',';
    if (lo) out << fmt((*lo)[i]);
    out << ',';
    if (hi) out << fmt((*hi)[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_summary(const std::filesystem::path& path, const Sample& s1,
                   const Sample& s2, const PointEstimate& pe) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "key,value\n";
  auto row = [&](const char* k, double v) { out << k << ',' << fmt(v) << '\n'; };
  row("n1", static_cast<double>(s1.size()));
  row("n2", static_cast<double>(s2.size()));
  row("zero_share1", s1.zero_share);
  row("zero_share2", s2.zero_share);
  row("shift1", s1.shift);
  row("shift2", s2.shift);
  row("bandwidth1", pe.h1.h);
  row("bandwidth2", pe.h2.h);
  row("tau1", pe.orientation.tau1);
  row("base_segment", static_cast<double>(pe.orientation.base()));
  row("segments", static_cast<double>(pe.orientation.segments.size()));
  for (std::size_t i = 0; i < pe.orientation.crossing_alpha.size(); ++i) {
    const std::string k = "crossing_alpha" + std::to_string(i + 1);
    out << k << ',' << fmt(pe.orientation.crossing_alpha[i]) << '\n';
  }
  row("iterations", static_cast<double>(pe.lambda.iterations_used));
  row("residual_sup", pe.lambda.residual_sup);
  row("monotone", pe.lambda.monotone ? 1.0 : 0.0);
  row("q_lo_reliable", pe.q_lo_reliable);
  row("q_hi_reliable", pe.q_hi_reliable);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct EstimateRun {
  Sample s1, s2;
  PriceSchedule p1, p2;
  EstimationConfig cfg;
  PointEstimate pe;
};

EstimateRun run_estimation(const CommonOpts& o, bool with_elasticity) {
  EstimateRun er;
  er.cfg = build_config(o);
  er.s1 = prepare_sample(load_sample(o.sample1), 1);
  er.s2 = prepare_sample(load_sample(o.sample2), 2);
  std::tie(er.p1, er.p2) = resolve_schedules(o, er.cfg, er.s1, er.s2);
  er.pe = run_point_estimate(er.s1, er.s2, er.p1, er.p2, er.cfg, true,
                             with_elasticity);
  return er;
}

int cmd_simulate(const CommonOpts& o) {
  const auto dir = resolve_out_dir(o.out_dir);
  const DesignId id = parse_design(o.design);
  const std::uint64_t seed = o.has_seed ? o.seed : 1;
  RngStream rng(seed, stream_mc_rep, 0);  // matches replicate 0 of montecarlo
  std::pair<Sample, Sample> drawn;
  switch (id) {
    case DesignId::one: drawn = gen_design1(o.n, rng); break;
    case DesignId::two: drawn = gen_design2(o.n, rng); break;
    case DesignId::appendix: drawn = gen_appendix_design(o.n, rng); break;
  }
  save_sample(drawn.first, (dir / "sample1.csv").string());
  save_sample(drawn.second, (dir / "sample2.csv").string());
  std::cout << "wrote " << (dir / "sample1.csv").string() << " and "
            << (dir / "sample2.csv").string() << "\n";
  return 0;
}

int cmd_estimate(const CommonOpts& o) {
  const auto dir = resolve_out_dir(o.out_dir);
  const EstimateRun er = run_estimation(o, false);
  write_grid(dir / "lambda_grid.csv", er.pe.lambda.alpha, er.pe.lambda.lambda);
  write_grid(dir / "utility_grid.csv", er.pe.utility.q_grid,
             er.pe.utility.u_values);
  write_summary(dir / "estimate_summary.csv", er.s1, er.s2, er.pe);
  std::cout << "estimate done: tau1=" << fmt(er.pe.orientation.tau1)
            << " iterations=" << er.pe.lambda.iterations_used
            << " residual_sup=" << fmt(er.pe.lambda.residual_sup) << "\n";
  return 0;
}

int cmd_bootstrap(const CommonOpts& o) {
  const auto dir = resolve_out_dir(o.out_dir);
  const EstimateRun er = run_estimation(o, false);
  const BootstrapBands bl =
      bootstrap_pipeline(er.s1, er.s2, er.p1, er.p2, er.cfg,
                         BootstrapTarget::lambda, er.pe);
  const BootstrapBands bu =
      bootstrap_pipeline(er.s1, er.s2, er.p1, er.p2, er.cfg,
                         BootstrapTarget::utility, er.pe);
  write_grid(dir / "lambda_grid.csv", bl.grid, bl.point_estimate, &bl.lo,
             &bl.hi);
  write_grid(dir / "utility_grid.csv", bu.grid, bu.point_estimate, &bu.lo,
             &bu.hi);
  write_summary(dir / "estimate_summary.csv", er.s1, er.s2, er.pe);
  std::cout << "bootstrap done: reps=" << bl.reps
            << " failures=" << bl.failures + bu.failures << "\n";
  return 0;
}

int cmd_elasticity(const CommonOpts& o) {
  const auto dir = resolve_out_dir(o.out_dir);
  const EstimateRun er = run_estimation(o, true);
  const ElasticityProfile& ep = er.pe.elasticity;

  // four-column contract for the headline (level) curve
  if (o.has_bootstrap_reps && o.bootstrap_reps > 0) {
    const BootstrapBands be =
        bootstrap_pipeline(er.s1, er.s2, er.p1, er.p2, er.cfg,
                           BootstrapTarget::elasticity, er.pe);
    write_grid(dir / "elasticity_grid.csv", be.grid, be.point_estimate,
               &be.lo, &be.hi);
  } else {
    write_grid(dir / "elasticity_grid.csv", ep.q, ep.level);
  }

  // full profile with the reliability flag
  std::ofstream out(dir / "elasticity_profile.csv");
  if (!out)
    throw std::runtime_error("cannot write " +
                             (dir / "elasticity_profile.csv").string());
  out << "point,level,curvature,convex,reliable\n";
  for (std::size_t i = 0; i < ep.q.size(); ++i)
    out << fmt(ep.q[i]) << ',' << fmt(ep.level[i]) << ','
        << fmt(ep.curvature[i]) << ',' << fmt(ep.convex[i]) << ','
        << static_cast<int>(ep.reliable[i]) << '\n';
  if (!out) throw std::runtime_error("write failed: elasticity_profile.csv");
  std::cout << "elasticity done: " << ep.q.size() << " grid points\n";
  return 0;
}

int cmd_montecarlo(const CommonOpts& o) {
  const auto dir = resolve_out_dir(o.out_dir);
  EstimationConfig cfg = build_config(o);
  const MetricsTable table =
      run_monte_carlo(parse_design(o.design), o.n, o.reps, cfg);
  write_metrics_csv(table, (dir / "metrics.csv").string());
  std::cout << "montecarlo done: " << table.size() << " metric rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iterative functional-equation estimator for two-period "
               "nonlinear-pricing data"};
  app.require_subcommand(1);
  CommonOpts o;

  auto add_io = [&](CLI::App* sub, bool need_samples) {
    if (need_samples) {
      sub->add_option("--sample1", o.sample1, "period-1 sample CSV")
          ->required();
      sub->add_option("--sample2", o.sample2, "period-2 sample CSV")
          ->required();
      sub->add_option("--config", o.config, "key=value configuration file");
      sub->add_option("--design", o.design,
                      "use this simulation design's known price schedules");
      auto* gp = sub->add_option("--grid-points", o.grid_points,
                                 "type-grid resolution");
      gp->each([&](const std::string&) { o.has_grid_points = true; });
    }
    sub->add_option("--out-dir", o.out_dir,
                    "output directory (falls back to ITERFUNC_OUT_DIR, then "
                    "the working directory)");
    auto* sd = sub->add_option("--seed", o.seed, "master seed");
    sd->each([&](const std::string&) { o.has_seed = true; });
  };

  auto* sim = app.add_subcommand("simulate", "draw one synthetic data set");
  sim->add_option("--design", o.design, "design name (1, 2, or appendix)")
      ->required();
  sim->add_option("--n", o.n, "observations per period")->required();
  add_io(sim, false);

  auto* est = app.add_subcommand("estimate", "point estimates on two samples");
  add_io(est, true);

  auto* boot = app.add_subcommand(
      "bootstrap", "point estimates plus multiplier-bootstrap bands");
  add_io(boot, true);
  auto* br = boot->add_option("--bootstrap-reps", o.bootstrap_reps,
                              "bootstrap replications");
  br->each([&](const std::string&) { o.has_bootstrap_reps = true; });

  auto* ela =
      app.add_subcommand("elasticity", "counterfactual demand responses");
  add_io(ela, true);
  auto* br2 = ela->add_option("--bootstrap-reps", o.bootstrap_reps,
                              "bootstrap replications for the level curve");
  br2->each([&](const std::string&) { o.has_bootstrap_reps = true; });

  auto* mc = app.add_subcommand("montecarlo", "repeated-draw study");
  mc->add_option("--design", o.design, "design name (1, 2, or appendix)")
      ->required();
  mc->add_option("--n", o.n, "observations per period")->required();
  mc->add_option("--reps", o.reps, "number of replications")->required();
  mc->add_option("--config", o.config, "key=value configuration file");
  auto* gp = mc->add_option("--grid-points", o.grid_points,
                            "type-grid resolution");
  gp->each([&](const std::string&) { o.has_grid_points = true; });
  add_io(mc, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (est->parsed()) return cmd_estimate(o);
    if (boot->parsed()) return cmd_bootstrap(o);
    if (ela->parsed()) return cmd_elasticity(o);
    if (mc->parsed()) return cmd_montecarlo(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
