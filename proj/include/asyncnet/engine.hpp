#ifndef ASYNCNET_ENGINE_HPP
#define ASYNCNET_ENGINE_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "asyncnet/costs.hpp"
#include "asyncnet/network_model.hpp"

namespace asyncnet {

// Iterates of all agents at one instant. Combination uses the intermediate
// psi values; w holds the post-combination estimates.
struct NetworkState {
  std::vector<ComplexVec> w;
  std::vector<ComplexVec> psi;
  long iteration = 0;
  bool diverged = false;
};

NetworkState make_initial_state(int agents, const ComplexVec& init);

// One round of per-iteration randomness, generated in the fixed order
// combination matrix, step-size diagonal, then per-agent data.
struct StepDraws {
  Eigen::MatrixXd a;
  Eigen::VectorXd m;
  std::vector<DataSample> data;
};

StepDraws draw_step(const MeanGraph& graph, const CombinationModel& cm,
                    const std::vector<StepSizeModel>& steps,
                    const std::vector<const Cost*>& costs, RandomStream& rng);

// Adapt-then-combine update: psi_k = w_k - m_k * stochastic_gradient, then
// w_k = sum_l a(l,k) psi_l. Sets the divergence flag on non-finite iterates.
void atc_step(NetworkState& state, const Eigen::MatrixXd& a,
              const Eigen::VectorXd& m, const std::vector<DataSample>& data,
              const std::vector<const Cost*>& costs);

// Stacked conjugate-embedded errors (one 2M vector per agent) driven by the
// equivalent error-form dynamics err <- A^T (I - M H) err + A^T M noise with
// H_k the constant extended Hessian of a quadratic cost. Refuses costs whose
// Hessian is not constant.
struct ErrorState {
  std::vector<Eigen::VectorXcd> err;
};

ErrorState make_error_state(const std::vector<const Cost*>& costs,
                            const ComplexVec& init_w);

void error_step(ErrorState& state, const Eigen::MatrixXd& a,
                const Eigen::VectorXd& m,
                const std::vector<Eigen::VectorXcd>& noise_ext,
                const std::vector<const Cost*>& costs);

// Per-iteration, across-trial averages with standard errors. Row 0 carries
// the initial-condition statistics; rows 1..horizon follow one per step.
struct ExperimentRecord {
  int agents = 0;
  std::size_t horizon = 0;
  std::size_t n_trials = 0;
  std::uint64_t base_seed = 0;
  bool divergent_excluded = false;  // were divergent trials dropped from means
  std::size_t n_diverged = 0;

  Eigen::MatrixXd msd, msd_se;                      // rows x agents
  Eigen::VectorXd msd_max, msd_max_se;              // max over agents
  Eigen::VectorXd disagreement, disagreement_se;    // mean over pairs
  Eigen::VectorXd disagreement_max, disagreement_max_se;
  Eigen::VectorXd m4_max, m4_max_se;                // max over agents of E||w~||^4

  std::vector<std::uint64_t> trial_seeds;
  std::vector<char> trial_diverged;
  std::vector<long> trial_divergence_iter;  // -1 when the trial stayed finite

  std::size_t rows() const { return horizon + 1; }
};

struct ExperimentSetup {
  const MeanGraph* graph = nullptr;
  const CombinationModel* combination = nullptr;
  const std::vector<StepSizeModel>* steps = nullptr;
  const std::vector<const Cost*>* costs = nullptr;
  ComplexVec init_w;            // shared initial iterate, zero by default
  bool exclude_divergent = false;  // drop flagged trials from the averages
  int threads = 0;              // 0 = ASYNCNET_THREADS or hardware default
};

// Runs n_trials independent trials (trial t is seeded with base_seed xor t)
// and aggregates with a fixed-order pairwise reduction, so the result is
// bit-identical for any worker count. A trial halts and is flagged once any
// agent's squared error exceeds 1e12 or turns non-finite; its series freezes
// at the crossing value.
ExperimentRecord run_experiment(const ExperimentSetup& setup,
                                std::size_t n_trials, std::size_t horizon,
                                std::uint64_t base_seed);

struct SteadyState {
  double value = 0.0;
  double se = 0.0;
};

// Mean of the final window_fraction of a series. The quoted SE is the larger
// of the window-averaged per-point SE and the sample spread over the window;
// neither assumes independence across time. Requires a window of >= 10 rows
// and 0 < window_fraction <= 0.5.
SteadyState steady_state(const Eigen::VectorXd& series,
                         const Eigen::VectorXd& series_se,
                         double window_fraction);

void write_timeseries_csv(const ExperimentRecord& record,
                          const std::string& path);

}  // namespace asyncnet

#endif  // ASYNCNET_ENGINE_HPP
