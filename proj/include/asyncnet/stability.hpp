#ifndef ASYNCNET_STABILITY_HPP
#define ASYNCNET_STABILITY_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "asyncnet/costs.hpp"
#include "asyncnet/network_model.hpp"

namespace asyncnet {

// Strict inequalities are evaluated with a relative guard of 1e-12; values
// inside the guard band are reported as marginal rather than decided.
enum class Verdict { Pass, Marginal, Fail };

const char* verdict_name(Verdict v);
Verdict strict_less(double lhs, double rhs);

struct AgentStability {
  double lambda_min = 0.0, lambda_max = 0.0;
  double mu_upper = 0.0;                    // range limit of the step-size
  double mu_bar = 0.0, c_mu = 0.0;          // first moment and variance
  double m2 = 0.0, m4 = 0.0;                // raw moments
  double gamma_sq = 0.0;                    // per-agent contraction factor
  double ratio2 = 0.0;                      // m2 / m1
  double ratio4 = 0.0;                      // sqrt(m4) / m1
  double limit2 = 0.0;                      // lambda_min / (alpha + lambda_max^2)
  double limit4 = 0.0;                      // lambda_min / (3 lambda_max^2 + 4 alpha)
  Verdict ms = Verdict::Fail;
  Verdict fourth = Verdict::Fail;
};

struct StabilityReport {
  std::vector<AgentStability> agents;
  double alpha = 0.0, sigma_v_sq = 0.0;
  double beta = 0.0;      // worst contraction of the mean-square recursion
  double theta = 0.0;     // worst second moment of the step-size
  double kappa = 0.0;     // spread max mu_bar / min mu_bar
  double nu_o = 0.0;      // max m2 / m1
  double nu = 0.0;        // max sqrt(m4) / m1
  double b = 0.0;         // kappa sigma_v_sq / min lambda_min
  double b4 = 0.0;        // 3 sigma_v_sq (kappa + 1) / min lambda_min

  Verdict ms_condition = Verdict::Fail;      // moment-ratio condition, the gate
  Verdict ms_sufficient = Verdict::Fail;     // deterministic range condition
  Verdict fourth_condition = Verdict::Fail;
  Verdict model_specific_bound = Verdict::Fail;  // mu_upper vs variant bound
  bool beta_stable = false;                  // |beta| < 1
  bool ms_relaxed = false;  // |1 - 2 mu_bar l_min + m2 (l_max^2 + alpha)| < 1,
                            // the tighter chain condition, informational only

  double envelope_limit() const;  // theta sigma_v_sq / (1 - beta)
  double b_nu_o() const { return b * nu_o; }
};

// Assembles the report from per-agent Hessian bounds, the gradient-noise
// constants, the step-size moments, and the per-agent range limits.
// Rejects moment sets with a zero mean step-size anywhere.
StabilityReport build_report(const std::vector<const Cost*>& costs,
                             const NoiseParams& noise, const MomentSet& moments,
                             const std::vector<StepSizeModel>& steps);

// Largest admissible step-size range limit for a variant. Bernoulli and
// Constant reduce to lambda_min / (alpha + lambda_max^2); Beta widens it by
// the factor 1 + zeta xi / ((1 + xi)(xi + zeta)) ... expressed through
// zeta = phi xi as 1 + phi xi / (1 + xi).
double model_bound(const StepSizeModel& model, double lambda_min,
                   double lambda_max, double alpha);

struct Envelope {
  std::vector<double> series;  // series[0] = eps0_sq, then one entry per step
  double limit = 0.0;          // theta sigma_v_sq / (1 - beta)
  double b_nu_o = 0.0;
  bool divergent = false;      // |beta| >= 1
};

// Worst-MSD envelope eps^2(i) = beta eps^2(i-1) + theta sigma_v_sq. When the
// moment condition passes, the limit is checked against the closed bound
// b nu_o (limit <= b nu_o + 1e-12) and a violation throws.
Envelope bound_envelope(const StabilityReport& report, double eps0_sq,
                        std::size_t horizon, double sigma_v_sq);

// Steady-state fourth-moment bound b4^2 nu^2; refuses (throws
// std::domain_error) when the fourth-order condition does not pass.
double fourth_bound(const StabilityReport& report);

void write_report_txt(const StabilityReport& report, const std::string& path);
void write_report_csv(const StabilityReport& report, const std::string& path);

}  // namespace asyncnet

#endif  // ASYNCNET_STABILITY_HPP
