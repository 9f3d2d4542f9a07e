#ifndef ASYNCNET_SUMMARY_HPP
#define ASYNCNET_SUMMARY_HPP

#include <string>
#include <vector>

#include "asyncnet/config.hpp"
#include "asyncnet/engine.hpp"
#include "asyncnet/stability.hpp"

namespace asyncnet {

struct BoundCheck {
  std::string name;
  bool applicable = true;  // some checks only apply under a condition
  bool pass = false;
  double measured = 0.0;
  double se = 0.0;
  double bound = 0.0;
  std::string detail;
};

// Steady-state estimates of one experiment against the analytic bounds.
struct SimulationSummary {
  SteadyState msd_max;
  SteadyState disagreement;
  SteadyState disagreement_max;
  SteadyState m4_max;
  Envelope envelope;
  std::size_t n_diverged = 0;
  std::vector<BoundCheck> checks;

  bool all_applicable_pass() const;
};

SimulationSummary summarize_experiment(const ExperimentConfig& config,
                                       const StabilityReport& stability,
                                       const ExperimentRecord& record);

void write_summary_csv(const SimulationSummary& summary,
                       const StabilityReport& stability,
                       const std::string& path);

}  // namespace asyncnet

#endif  // ASYNCNET_SUMMARY_HPP
