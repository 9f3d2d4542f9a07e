#include "asyncnet/summary.hpp"

#include <cmath>

#include "asyncnet/csv.hpp"

namespace asyncnet {

bool SimulationSummary::all_applicable_pass() const {
  for (const BoundCheck& c : checks)
    if (c.applicable && !c.pass) return false;
  return true;
}

SimulationSummary summarize_experiment(const ExperimentConfig& config,
                                       const StabilityReport& stability,
                                       const ExperimentRecord& record) {
  SimulationSummary s;
  s.n_diverged = record.n_diverged;

  const ComplexVec init = config.init_w.size() > 0
                              ? config.init_w
                              : ComplexVec::Zero(config.dim);
  const double eps0_sq = (config.costs.front()->minimizer() - init).squaredNorm();
  s.envelope = bound_envelope(stability, eps0_sq, record.horizon,
                              stability.sigma_v_sq);

  const bool stable = stability.ms_condition == Verdict::Pass;
  const bool window_ok =
      record.rows() >= 20 &&
      static_cast<Eigen::Index>(config.run.window_fraction * record.rows()) >= 10;
  if (window_ok) {
    s.msd_max = steady_state(record.msd_max, record.msd_max_se,
                             config.run.window_fraction);
    s.disagreement = steady_state(record.disagreement, record.disagreement_se,
                                  config.run.window_fraction);
    s.disagreement_max = steady_state(
        record.disagreement_max, record.disagreement_max_se,
        config.run.window_fraction);
    s.m4_max =
        steady_state(record.m4_max, record.m4_max_se, config.run.window_fraction);
  }

  if (stable && window_ok) {
    {
      BoundCheck c;
      c.name = "steady_msd_max_le_b_nu_o";
      c.measured = s.msd_max.value;
      c.se = s.msd_max.se;
      c.bound = s.envelope.b_nu_o;
      c.pass = c.measured + 2.0 * c.se <= c.bound;
      c.detail = "requires a 2-SE margin";
      s.checks.push_back(c);
    }
    {
      BoundCheck c;
      c.name = "steady_msd_max_le_envelope_limit";
      c.measured = s.msd_max.value;
      c.se = s.msd_max.se;
      c.bound = s.envelope.limit;
      c.pass = c.measured <= c.bound + 2.0 * c.se;
      s.checks.push_back(c);
    }
    {
      // Transient share of the envelope at the window start; the steady
      // window is only meaningful once this is below 1% of the limit.
      const std::size_t start =
          record.rows() - static_cast<std::size_t>(
                              config.run.window_fraction * record.rows());
      BoundCheck c;
      c.name = "steady_window_past_transient";
      c.measured = std::pow(stability.beta, static_cast<double>(start)) * eps0_sq;
      c.bound = 0.01 * s.envelope.limit;
      c.pass = c.measured <= c.bound;
      s.checks.push_back(c);
    }
  }

  {
    BoundCheck c;
    c.name = "envelope_dominance";
    c.applicable = stable;
    c.pass = true;
    double worst_excess = 0.0;
    long worst_row = -1;
    for (std::size_t r = 0; r < record.rows(); ++r) {
      const double allowed =
          s.envelope.series[r] + 2.0 * record.msd_max_se(r);
      if (record.msd_max(r) > allowed) {
        c.pass = false;
        const double excess = record.msd_max(r) - allowed;
        if (excess > worst_excess) {
          worst_excess = excess;
          worst_row = static_cast<long>(r);
        }
      }
    }
    c.measured = worst_excess;
    c.bound = 0.0;
    if (worst_row >= 0)
      c.detail = "first violated at row " + std::to_string(worst_row);
    s.checks.push_back(c);
  }

  {
    BoundCheck c;
    c.name = "steady_m4_max_le_fourth_bound";
    c.applicable =
        stable && window_ok && stability.fourth_condition == Verdict::Pass;
    if (c.applicable) {
      c.measured = s.m4_max.value;
      c.se = s.m4_max.se;
      c.bound = fourth_bound(stability);
      c.pass = c.measured <= c.bound + 2.0 * c.se;
    }
    s.checks.push_back(c);
  }

  {
    BoundCheck c;
    c.name = "divergence_flagged";
    c.applicable = !stable;
    c.measured = static_cast<double>(record.n_diverged);
    c.bound = 1.0;
    c.pass = record.n_diverged >= 1;
    c.detail = "an unstable configuration must visibly diverge";
    s.checks.push_back(c);
  }

  return s;
}

void write_summary_csv(const SimulationSummary& summary,
                       const StabilityReport& stability,
                       const std::string& path) {
  CsvWriter csv(path, {"name", "value", "se", "bound", "pass"});
  auto metric = [&](const std::string& name, double value, double se) {
    csv.begin_row();
    csv.add(name);
    csv.add(value);
    csv.add(se);
    csv.add(std::string());
    csv.add(std::string());
    csv.end_row();
  };
  metric("steady_msd_max", summary.msd_max.value, summary.msd_max.se);
  metric("steady_disagreement", summary.disagreement.value, summary.disagreement.se);
  metric("steady_disagreement_max", summary.disagreement_max.value,
         summary.disagreement_max.se);
  metric("steady_m4_max", summary.m4_max.value, summary.m4_max.se);
  metric("n_diverged", static_cast<double>(summary.n_diverged), 0.0);
  metric("beta", stability.beta, 0.0);
  metric("theta", stability.theta, 0.0);
  metric("kappa", stability.kappa, 0.0);
  metric("nu_o", stability.nu_o, 0.0);
  metric("nu", stability.nu, 0.0);
  metric("b_nu_o", stability.b_nu_o(), 0.0);
  metric("envelope_limit", summary.envelope.limit, 0.0);

  for (const BoundCheck& c : summary.checks) {
    csv.begin_row();
    csv.add(c.name);
    csv.add(c.measured);
    csv.add(c.se);
    csv.add(c.bound);
    csv.add(std::string(c.applicable ? (c.pass ? "1" : "0") : "skip"));
    csv.end_row();
  }
}

}  // namespace asyncnet
