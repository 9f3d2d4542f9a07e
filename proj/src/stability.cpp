#include "asyncnet/stability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "asyncnet/csv.hpp"

namespace asyncnet {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Marginal: return "marginal";
    case Verdict::Fail: return "fail";
  }
  return "?";
}

Verdict strict_less(double lhs, double rhs) {
  const double guard = 1e-12 * std::max({std::abs(lhs), std::abs(rhs), 1.0});
  if (lhs < rhs - guard) return Verdict::Pass;
  if (lhs > rhs + guard) return Verdict::Fail;
  return Verdict::Marginal;
}

namespace {

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Marginal || b == Verdict::Marginal) return Verdict::Marginal;
  return Verdict::Pass;
}

}  // namespace

double StabilityReport::envelope_limit() const {
  return theta * sigma_v_sq / (1.0 - beta);
}

StabilityReport build_report(const std::vector<const Cost*>& costs,
                             const NoiseParams& noise, const MomentSet& moments,
                             const std::vector<StepSizeModel>& steps) {
  const int n = moments.agents;
  if (static_cast<int>(costs.size()) != n || static_cast<int>(steps.size()) != n)
    throw std::invalid_argument("per-agent inputs must match the agent count");

  StabilityReport report;
  report.alpha = noise.alpha;
  report.sigma_v_sq = noise.sigma_v_sq;
  report.agents.resize(n);

  double min_lambda_min = std::numeric_limits<double>::infinity();
  double min_mu_bar = std::numeric_limits<double>::infinity();
  double max_mu_bar = 0.0;
  report.ms_condition = Verdict::Pass;
  report.ms_sufficient = Verdict::Pass;
  report.fourth_condition = Verdict::Pass;
  report.model_specific_bound = Verdict::Pass;
  report.ms_relaxed = true;

  for (int k = 0; k < n; ++k) {
    AgentStability& a = report.agents[k];
    const auto [lmin, lmax] = costs[k]->hessian_bounds();
    a.lambda_min = lmin;
    a.lambda_max = lmax;
    a.mu_upper = steps[k].mu;
    a.mu_bar = moments.mu_m1(k);
    a.m2 = moments.mu_m2(k);
    a.m4 = moments.mu_m4(k);
    a.c_mu = a.m2 - a.mu_bar * a.mu_bar;
    if (!(a.mu_bar > 0.0))
      throw std::invalid_argument("agent " + std::to_string(k) +
                                  " has zero mean step-size; ratios undefined");

    a.gamma_sq = 1.0 - 2.0 * a.mu_bar * lmin + a.m2 * lmax * lmax;
    a.ratio2 = a.m2 / a.mu_bar;
    a.ratio4 = std::sqrt(a.m4) / a.mu_bar;
    a.limit2 = lmin / (noise.alpha + lmax * lmax);
    a.limit4 = lmin / (3.0 * lmax * lmax + 4.0 * noise.alpha);
    a.ms = strict_less(a.ratio2, a.limit2);
    a.fourth = strict_less(a.ratio4, a.limit4);

    report.ms_condition = combine(report.ms_condition, a.ms);
    report.fourth_condition = combine(report.fourth_condition, a.fourth);
    report.ms_sufficient =
        combine(report.ms_sufficient, strict_less(a.mu_upper, a.limit2));
    report.model_specific_bound = combine(
        report.model_specific_bound,
        strict_less(a.mu_upper, model_bound(steps[k], lmin, lmax, noise.alpha)));
    if (std::abs(1.0 - 2.0 * a.mu_bar * lmin +
                 a.m2 * (lmax * lmax + noise.alpha)) >= 1.0)
      report.ms_relaxed = false;

    // Moment sanity per agent: m2 / m1 never exceeds the range limit.
    if (a.ratio2 > a.mu_upper * (1.0 + 1e-12))
      throw std::logic_error("step-size moments inconsistent with range limit");

    min_lambda_min = std::min(min_lambda_min, lmin);
    min_mu_bar = std::min(min_mu_bar, a.mu_bar);
    max_mu_bar = std::max(max_mu_bar, a.mu_bar);
  }

  report.beta = 0.0;
  report.theta = 0.0;
  report.nu_o = 0.0;
  report.nu = 0.0;
  for (const AgentStability& a : report.agents) {
    report.beta = std::max(report.beta, a.gamma_sq + noise.alpha * a.m2);
    report.theta = std::max(report.theta, a.m2);
    report.nu_o = std::max(report.nu_o, a.ratio2);
    report.nu = std::max(report.nu, a.ratio4);
  }
  report.kappa = max_mu_bar / min_mu_bar;
  report.b = report.kappa * noise.sigma_v_sq / min_lambda_min;
  report.b4 = 3.0 * noise.sigma_v_sq * (report.kappa + 1.0) / min_lambda_min;
  report.beta_stable = std::abs(report.beta) < 1.0;

  if (report.nu_o > report.nu * (1.0 + 1e-12))
    throw std::logic_error("moment inequality nu_o <= nu violated");
  if (report.fourth_condition == Verdict::Pass &&
      report.ms_condition == Verdict::Fail)
    throw std::logic_error("fourth-order condition passed without mean-square");

  return report;
}

double model_bound(const StepSizeModel& model, double lambda_min,
                   double lambda_max, double alpha) {
  const double base = lambda_min / (alpha + lambda_max * lambda_max);
  if (model.kind != StepSizeModel::Kind::Beta) return base;
  // With zeta = phi xi the widened range is (1 + phi xi / (1 + xi)) base.
  const double phi = model.zeta / model.xi;
  return (1.0 + phi * model.xi / (1.0 + model.xi)) * base;
}

Envelope bound_envelope(const StabilityReport& report, double eps0_sq,
                        std::size_t horizon, double sigma_v_sq) {
  if (!(eps0_sq >= 0.0))
    throw std::invalid_argument("initial error variance must be >= 0");
  Envelope env;
  env.divergent = !report.beta_stable;
  env.b_nu_o = report.b * report.nu_o;
  env.limit = env.divergent ? std::numeric_limits<double>::infinity()
                            : report.theta * sigma_v_sq / (1.0 - report.beta);
  env.series.resize(horizon + 1);
  env.series[0] = eps0_sq;
  for (std::size_t i = 1; i <= horizon; ++i)
    env.series[i] = report.beta * env.series[i - 1] + report.theta * sigma_v_sq;
  if (report.ms_condition == Verdict::Pass && !env.divergent &&
      env.limit > env.b_nu_o + 1e-12)
    throw std::logic_error("envelope limit exceeds the closed bound b nu_o");
  return env;
}

double fourth_bound(const StabilityReport& report) {
  if (report.fourth_condition != Verdict::Pass)
    throw std::domain_error(
        "fourth-order moment condition does not hold; the bound b4^2 nu^2 "
        "is only established under that condition");
  return report.b4 * report.b4 * report.nu * report.nu;
}

void write_report_txt(const StabilityReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open report file: " + path);
  auto line = [&](const std::string& key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  line("agents", std::to_string(report.agents.size()));
  line("alpha", format_double(report.alpha));
  line("sigma_v_sq", format_double(report.sigma_v_sq));
  line("beta", format_double(report.beta));
  line("theta", format_double(report.theta));
  line("kappa", format_double(report.kappa));
  line("nu_o", format_double(report.nu_o));
  line("nu", format_double(report.nu));
  line("b", format_double(report.b));
  line("b4", format_double(report.b4));
  line("b_nu_o", format_double(report.b_nu_o()));
  line("envelope_limit", report.beta_stable ? format_double(report.envelope_limit())
                                            : "inf");
  line("ms_condition", verdict_name(report.ms_condition));
  line("ms_sufficient", verdict_name(report.ms_sufficient));
  line("fourth_condition", verdict_name(report.fourth_condition));
  line("model_specific_bound", verdict_name(report.model_specific_bound));
  line("beta_stable", report.beta_stable ? "true" : "false");
  line("ms_relaxed", report.ms_relaxed ? "true" : "false");
  if (report.fourth_condition == Verdict::Pass)
    line("fourth_bound", format_double(report.b4 * report.b4 * report.nu * report.nu));
}

void write_report_csv(const StabilityReport& report, const std::string& path) {
  CsvWriter csv(path, {"agent", "lambda_min", "lambda_max", "mu_upper", "mu_bar",
                       "c_mu", "m2", "m4", "gamma_sq", "ratio2", "limit2",
                       "ratio4", "limit4", "ms", "fourth"});
  for (std::size_t k = 0; k < report.agents.size(); ++k) {
    const AgentStability& a = report.agents[k];
    csv.begin_row();
    csv.add(k);
    csv.add(a.lambda_min);
    csv.add(a.lambda_max);
    csv.add(a.mu_upper);
    csv.add(a.mu_bar);
    csv.add(a.c_mu);
    csv.add(a.m2);
    csv.add(a.m4);
    csv.add(a.gamma_sq);
    csv.add(a.ratio2);
    csv.add(a.limit2);
    csv.add(a.ratio4);
    csv.add(a.limit4);
    csv.add(std::string(verdict_name(a.ms)));
    csv.add(std::string(verdict_name(a.fourth)));
    csv.end_row();
  }
}

}  // namespace asyncnet
