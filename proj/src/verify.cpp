#include "asyncnet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "asyncnet/csv.hpp"
#include "asyncnet/engine.hpp"
#include "asyncnet/stability.hpp"
#include "asyncnet/summary.hpp"

namespace asyncnet {

namespace {

constexpr std::uint64_t kMomentStream = 0x6d6f6d656e74ULL;
constexpr std::uint64_t kLemmaStream = 0x6c656d6d61ULL;
constexpr std::uint64_t kRecursionStream = 0x7265637572ULL;
constexpr std::uint64_t kIndependenceStream = 0x696e646570ULL;

struct Context {
  const ExperimentConfig& config;
  std::vector<const Cost*> costs;
  NoiseParams noise;
  StabilityReport stability;
  std::vector<CheckOutcome> outcomes;

  explicit Context(const ExperimentConfig& cfg)
      : config(cfg), costs(cfg.cost_pointers()), noise(cfg.resolve_noise()) {
    const MomentSet analytic =
        analytic_moments(*cfg.graph, cfg.steps, *cfg.combination);
    stability = build_report(costs, noise, analytic, cfg.steps);
  }

  void add(const std::string& suite, const std::string& name, bool pass,
           double measured, double tolerance, const std::string& detail = "") {
    outcomes.push_back({suite, name, pass, false, measured, tolerance, detail});
  }

  void skip(const std::string& suite, const std::string& name,
            const std::string& why) {
    outcomes.push_back({suite, name, true, true, 0.0, 0.0, why});
  }
};

// Largest |analytic - empirical| measured in units of the empirical SE.
struct SigmaGap {
  double worst = 0.0;
  std::string where;

  void feed(double analytic, double empirical, double se, const std::string& tag) {
    const double gap = std::abs(analytic - empirical);
    if (gap == 0.0) return;
    const double sigmas = gap / std::max(se, 1e-300);
    if (sigmas > worst) {
      worst = sigmas;
      where = tag;
    }
  }
};

void suite_moments(Context& ctx) {
  const auto& cfg = ctx.config;
  RandomStream rng = RandomStream::derive(cfg.run.base_seed, kMomentStream);
  const std::size_t n_samples = 100000;
  const MomentSet analytic =
      analytic_moments(*cfg.graph, cfg.steps, *cfg.combination);
  const MomentSet empirical = empirical_moments(*cfg.graph, cfg.steps,
                                                *cfg.combination, n_samples, rng);
  const int n = cfg.agents;

  SigmaGap first;
  for (int k = 0; k < n; ++k)
    first.feed(analytic.mu_bar(k), empirical.mu_bar(k), empirical.mu_bar_se(k),
               "mu_bar[" + std::to_string(k) + "]");
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      first.feed(analytic.abar(l, k), empirical.abar(l, k), empirical.abar_se(l, k),
                 "abar(" + std::to_string(l) + "," + std::to_string(k) + ")");
  ctx.add("moments", "first_moments_within_3se", first.worst <= 3.0, first.worst,
          3.0, first.where);

  SigmaGap mom;
  for (int k = 0; k < n; ++k) {
    mom.feed(analytic.mu_m2(k), empirical.mu_m2(k), empirical.mu_m2_se(k),
             "mu_m2[" + std::to_string(k) + "]");
    mom.feed(analytic.mu_m4(k), empirical.mu_m4(k), empirical.mu_m4_se(k),
             "mu_m4[" + std::to_string(k) + "]");
  }
  ctx.add("moments", "step_power_moments_within_3se", mom.worst <= 3.0, mom.worst,
          3.0, mom.where);

  SigmaGap second;
  for (int r = 0; r < n * n; ++r)
    for (int c = 0; c < n * n; ++c) {
      second.feed(analytic.c_m(r, c), empirical.c_m(r, c), empirical.c_m_se(r, c),
                  "c_m(" + std::to_string(r) + "," + std::to_string(c) + ")");
      second.feed(analytic.c_a(r, c), empirical.c_a(r, c), empirical.c_a_se(r, c),
                  "c_a(" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
  ctx.add("moments", "kronecker_covariances_within_3se", second.worst <= 3.0,
          second.worst, 3.0, second.where);

  // Independence of the step-size and combination draws: the sample
  // cross-covariance between every mu_k and every modeled link must vanish.
  RandomStream cross = RandomStream::derive(cfg.run.base_seed, kIndependenceStream);
  const std::size_t n_cross = 50000;
  const std::size_t n_links = cfg.combination->links().size();
  Eigen::MatrixXd sum_prod = Eigen::MatrixXd::Zero(n, n_links);
  Eigen::MatrixXd sum_prod_sq = Eigen::MatrixXd::Zero(n, n_links);
  Eigen::VectorXd mu_mean = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd link_mean = Eigen::VectorXd::Zero(n_links);
  {
    RandomStream replay = cross;
    for (std::size_t s = 0; s < n_cross; ++s) {
      const Eigen::VectorXd mu = sample_step_matrix(cfg.steps, cross);
      const Eigen::MatrixXd a =
          sample_combination_matrix(*cfg.graph, *cfg.combination, cross);
      mu_mean += mu;
      std::size_t j = 0;
      for (const auto& kv : cfg.combination->links())
        link_mean(j++) += a(kv.first.first, kv.first.second);
    }
    mu_mean /= static_cast<double>(n_cross);
    link_mean /= static_cast<double>(n_cross);
    for (std::size_t s = 0; s < n_cross; ++s) {
      const Eigen::VectorXd mu = sample_step_matrix(cfg.steps, replay);
      const Eigen::MatrixXd a =
          sample_combination_matrix(*cfg.graph, *cfg.combination, replay);
      std::size_t j = 0;
      for (const auto& kv : cfg.combination->links()) {
        const double da = a(kv.first.first, kv.first.second) - link_mean(j);
        for (int k = 0; k < n; ++k) {
          const double z = (mu(k) - mu_mean(k)) * da;
          sum_prod(k, j) += z;
          sum_prod_sq(k, j) += z * z;
        }
        ++j;
      }
    }
  }
  SigmaGap indep;
  for (int k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n_links; ++j) {
      const double mean = sum_prod(k, j) / static_cast<double>(n_cross);
      const double var = std::max(
          0.0, sum_prod_sq(k, j) / static_cast<double>(n_cross) - mean * mean);
      const double se = std::sqrt(var / static_cast<double>(n_cross));
      indep.feed(0.0, mean, se, "cross_cov(mu_" + std::to_string(k) + ")");
    }
  ctx.add("moments", "step_and_link_draws_uncorrelated", indep.worst <= 3.0,
          indep.worst, 3.0, indep.where);
}

void suite_lemmas(Context& ctx) {
  const auto& cfg = ctx.config;
  const MomentSet analytic =
      analytic_moments(*cfg.graph, cfg.steps, *cfg.combination);
  RandomStream rng = RandomStream::derive(cfg.run.base_seed, kLemmaStream);
  const MomentSet empirical =
      empirical_moments(*cfg.graph, cfg.steps, *cfg.combination, 100000, rng);

  const StochasticityReport report = check_left_stochastic(analytic, &empirical);
  ctx.add("lemmas", "left_stochastic_mean_and_second_moment", report.pass,
          static_cast<double>(report.failures.size()), 0.0,
          report.failures.empty() ? "" : report.failures.front());

  const auto unions = neighborhood_union(*cfg.graph, *cfg.combination, rng);
  bool union_ok = true;
  std::string where;
  for (int k = 0; k < cfg.agents; ++k)
    if (unions[k] != cfg.graph->neighbors(k)) {
      union_ok = false;
      where = "agent " + std::to_string(k);
      break;
    }
  ctx.add("lemmas", "realized_neighborhood_union_matches_mean_graph", union_ok,
          union_ok ? 0.0 : 1.0, 0.0, where);

  // Entries the spatially-uncorrelated pattern pins to zero must be zero in
  // the analytic matrix and statistically zero in the empirical one.
  const int n = cfg.agents;
  double worst_analytic = 0.0;
  SigmaGap emp;
  for (int r = 0; r < n * n; ++r)
    for (int c = 0; c < n * n; ++c) {
      if (analytic.c_a(r, c) != 0.0) continue;
      worst_analytic = std::max(worst_analytic, std::abs(analytic.c_a(r, c)));
      emp.feed(0.0, empirical.c_a(r, c), empirical.c_a_se(r, c),
               "c_a(" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
  ctx.add("lemmas", "covariance_zero_pattern", worst_analytic == 0.0 && emp.worst <= 3.0,
          emp.worst, 3.0, emp.where);
}

void suite_recursion(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto& costs = ctx.costs;
  const int n = cfg.agents;
  RandomStream rng = RandomStream::derive(cfg.run.base_seed, kRecursionStream);

  const ComplexVec init =
      cfg.init_w.size() > 0 ? cfg.init_w : ComplexVec::Zero(cfg.dim);
  NetworkState direct = make_initial_state(n, init);
  ErrorState form = make_error_state(costs, init);

  double worst_rel = 0.0;
  std::vector<Eigen::VectorXcd> noise_ext(n);
  for (int step = 0; step < 500; ++step) {
    const StepDraws draws =
        draw_step(*cfg.graph, *cfg.combination, cfg.steps, costs, rng);
    for (int k = 0; k < n; ++k) {
      const ComplexVec noise =
          costs[k]->stochastic_gradient(direct.w[k], draws.data[k]) -
          costs[k]->gradient(direct.w[k]);
      noise_ext[k] = embed_conjugate(noise);
    }
    atc_step(direct, draws.a, draws.m, draws.data, costs);
    error_step(form, draws.a, draws.m, noise_ext, costs);
    for (int k = 0; k < n; ++k) {
      const ComplexVec direct_err = costs[k]->minimizer() - direct.w[k];
      const ComplexVec form_err = unembed_conjugate(form.err[k]);
      const double rel = (direct_err - form_err).norm() /
                         std::max(direct_err.norm(), 1e-12);
      worst_rel = std::max(worst_rel, rel);
    }
  }
  ctx.add("recursion", "error_form_matches_direct_500_steps", worst_rel <= 1e-10,
          worst_rel, 1e-10);

  // Exact data keeps every agent at the minimizer under any draws.
  std::vector<std::shared_ptr<QuadraticCost>> noiseless;
  std::vector<const Cost*> noiseless_ptrs;
  for (const auto& cost : cfg.costs) {
    noiseless.push_back(std::make_shared<QuadraticCost>(
        cost->regressor_covariance(), cost->minimizer(), 0.0));
    noiseless_ptrs.push_back(noiseless.back().get());
  }
  NetworkState fixed = make_initial_state(n, cfg.costs.front()->minimizer());
  double worst_drift = 0.0;
  for (int step = 0; step < 100; ++step) {
    const StepDraws draws =
        draw_step(*cfg.graph, *cfg.combination, cfg.steps, noiseless_ptrs, rng);
    atc_step(fixed, draws.a, draws.m, draws.data, noiseless_ptrs);
    for (int k = 0; k < n; ++k)
      worst_drift = std::max(
          worst_drift, (fixed.w[k] - noiseless_ptrs[k]->minimizer()).norm());
  }
  ctx.add("recursion", "minimizer_is_fixed_point_with_exact_data",
          worst_drift <= 1e-12, worst_drift, 1e-12);
}

ExperimentRecord run_for(const ExperimentConfig& cfg, const Context& ctx) {
  ExperimentSetup setup;
  setup.graph = cfg.graph.get();
  setup.combination = cfg.combination.get();
  setup.steps = &cfg.steps;
  auto costs = cfg.cost_pointers();
  setup.costs = &costs;
  setup.init_w = cfg.init_w;
  setup.exclude_divergent = ctx.stability.ms_condition != Verdict::Pass;
  return run_experiment(setup, cfg.run.trials, cfg.run.horizon,
                        cfg.run.base_seed);
}

void suite_bounds(Context& ctx) {
  const ExperimentRecord record = run_for(ctx.config, ctx);
  const SimulationSummary summary =
      summarize_experiment(ctx.config, ctx.stability, record);
  for (const BoundCheck& c : summary.checks) {
    if (!c.applicable) continue;
    ctx.add("bounds", c.name, c.pass, c.measured, c.bound, c.detail);
  }
}

void suite_fourth(Context& ctx) {
  if (ctx.stability.fourth_condition != Verdict::Pass) {
    ctx.skip("fourth", "steady_m4_max_le_fourth_bound",
             "fourth-order moment condition does not hold for this model");
    return;
  }
  ctx.add("fourth", "fourth_implies_mean_square",
          ctx.stability.ms_condition == Verdict::Pass,
          ctx.stability.ms_condition == Verdict::Pass ? 1.0 : 0.0, 1.0);
  ctx.add("fourth", "nu_o_le_nu", ctx.stability.nu_o <= ctx.stability.nu * (1 + 1e-12),
          ctx.stability.nu_o, ctx.stability.nu);

  const ExperimentRecord record = run_for(ctx.config, ctx);
  const SimulationSummary summary =
      summarize_experiment(ctx.config, ctx.stability, record);
  for (const BoundCheck& c : summary.checks)
    if (c.name == "steady_m4_max_le_fourth_bound" && c.applicable)
      ctx.add("fourth", c.name, c.pass, c.measured, c.bound, c.detail);
}

ExperimentConfig scaled_config(const ExperimentConfig& base, double factor) {
  ExperimentConfig cfg = base;
  for (StepSizeModel& m : cfg.steps) m.mu *= factor;
  return cfg;
}

void suite_scaling(Context& ctx) {
  if (ctx.stability.ms_condition != Verdict::Pass) {
    ctx.skip("scaling", "steady_msd_scales_linearly_in_nu",
             "base configuration is not mean-square stable");
    return;
  }
  const double factors[] = {1.0, 0.5, 0.25};
  std::vector<double> nus, msds, ratios, ratio_ses;
  for (double f : factors) {
    const ExperimentConfig cfg = scaled_config(ctx.config, f);
    const auto costs = cfg.cost_pointers();
    const MomentSet moments =
        analytic_moments(*cfg.graph, cfg.steps, *cfg.combination);
    const StabilityReport stab =
        build_report(costs, ctx.noise, moments, cfg.steps);

    ExperimentSetup setup;
    setup.graph = cfg.graph.get();
    setup.combination = cfg.combination.get();
    setup.steps = &cfg.steps;
    setup.costs = &costs;
    setup.init_w = cfg.init_w;
    setup.exclude_divergent = stab.ms_condition != Verdict::Pass;
    const ExperimentRecord record = run_experiment(
        setup, cfg.run.trials, cfg.run.horizon, cfg.run.base_seed);

    const SteadyState msd = steady_state(record.msd_max, record.msd_max_se,
                                         cfg.run.window_fraction);
    const SteadyState dis = steady_state(record.disagreement,
                                         record.disagreement_se,
                                         cfg.run.window_fraction);
    nus.push_back(stab.nu);
    msds.push_back(msd.value);
    ratios.push_back(dis.value / msd.value);
    // First-order error propagation for the ratio.
    ratio_ses.push_back(ratios.back() *
                        std::sqrt(std::pow(dis.se / dis.value, 2) +
                                  std::pow(msd.se / msd.value, 2)));
  }

  // Least-squares slope of log msd against log nu.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int points = 3;
  for (int i = 0; i < points; ++i) {
    const double x = std::log(nus[i]);
    const double y = std::log(msds[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (points * sxy - sx * sy) / (points * sxx - sx * sx);
  ctx.add("scaling", "steady_msd_scales_linearly_in_nu",
          slope >= 0.8 && slope <= 1.2, slope, 1.0,
          "log-log slope must lie in [0.8, 1.2]");

  // Clustering sharpens as nu shrinks: the disagreement/MSD ratio decreases
  // down the sweep, allowing 2-SE noise on each comparison.
  bool ordered = ratios.front() > ratios.back();
  std::string detail;
  for (int i = 0; i + 1 < points; ++i) {
    const double diff = ratios[i] - ratios[i + 1];
    const double se = std::sqrt(ratio_ses[i] * ratio_ses[i] +
                                ratio_ses[i + 1] * ratio_ses[i + 1]);
    if (diff <= -2.0 * se) {
      ordered = false;
      detail = "ratio rose from sweep point " + std::to_string(i);
    }
  }
  ctx.add("scaling", "disagreement_ratio_decreases_with_nu", ordered,
          ratios.front() - ratios.back(), 0.0, detail);
}

}  // namespace

std::vector<CheckOutcome> run_verify(const ExperimentConfig& config,
                                     const std::string& suite) {
  static const std::set<std::string> known = {
      "moments", "lemmas", "recursion", "bounds", "scaling", "fourth", "all"};
  if (!known.count(suite))
    throw std::invalid_argument("unknown verify suite: " + suite);

  Context ctx(config);
  const bool all = suite == "all";
  if (all || suite == "moments") suite_moments(ctx);
  if (all || suite == "lemmas") suite_lemmas(ctx);
  if (all || suite == "recursion") suite_recursion(ctx);
  if (all || suite == "bounds") suite_bounds(ctx);
  if (all || suite == "fourth") suite_fourth(ctx);
  if (all || suite == "scaling") suite_scaling(ctx);
  return ctx.outcomes;
}

std::size_t count_failures(const std::vector<CheckOutcome>& outcomes) {
  std::size_t failed = 0;
  for (const CheckOutcome& o : outcomes)
    if (!o.skipped && !o.pass) ++failed;
  return failed;
}

void write_verify_csv(const std::vector<CheckOutcome>& outcomes,
                      const std::string& path) {
  CsvWriter csv(path, {"suite", "check", "result", "measured", "tolerance",
                       "detail"});
  for (const CheckOutcome& o : outcomes) {
    csv.begin_row();
    csv.add(o.suite);
    csv.add(o.name);
    csv.add(std::string(o.skipped ? "skip" : (o.pass ? "pass" : "fail")));
    csv.add(o.measured);
    csv.add(o.tolerance);
    csv.add(o.detail);
    csv.end_row();
  }
}

}  // namespace asyncnet
