#ifndef ASYNCNET_NETWORK_MODEL_HPP
#define ASYNCNET_NETWORK_MODEL_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "asyncnet/rng.hpp"

namespace asyncnet {

// Per-agent random step-size process. Realizations always lie in [0, mu].
struct StepSizeModel {
  enum class Kind { Constant, Bernoulli, Beta };

  Kind kind = Kind::Constant;
  double mu = 0.0;    // upper limit of the step-size range
  double q = 0.0;     // Bernoulli on-probability
  double xi = 0.0;    // Beta shape parameters
  double zeta = 0.0;

  static StepSizeModel constant(double mu);
  static StepSizeModel bernoulli(double q, double mu);
  static StepSizeModel beta(double xi, double zeta, double mu);

  double mean() const;
  double variance() const;
  // m-th raw moment E[mu(i)^m]; closed form for all three variants.
  double moment(int m) const;
  double sample(RandomStream& rng) const;
  // Probability that a single draw is nonzero (used for union coverage).
  double nonzero_probability() const;
};

// Random weight process for one directed link (l -> k), l != k, scaled so
// realizations lie in [0, a]. Deterministic links are Bernoulli with eta = 1.
struct LinkModel {
  enum class Kind { Bernoulli, Beta };

  Kind kind = Kind::Bernoulli;
  double a = 0.0;     // upper limit, in (0, 1)
  double eta = 1.0;   // Bernoulli on-probability, in (0, 1]
  double xi = 0.0;    // Beta shape parameters
  double zeta = 0.0;

  static LinkModel bernoulli(double eta, double a);
  static LinkModel beta(double xi, double zeta, double a);

  double mean() const;
  double variance() const;
  double sample(RandomStream& rng) const;
  double nonzero_probability() const;
};

// Fixed topology induced by the mean combination matrix: neighborhoods and
// the left-stochastic matrix of mean weights.
class MeanGraph {
 public:
  MeanGraph(Eigen::MatrixXd abar, std::vector<std::vector<int>> neighbors);

  int agents() const { return static_cast<int>(abar_.cols()); }
  const Eigen::MatrixXd& mean_matrix() const { return abar_; }
  // Sorted neighborhood of agent k, always including k itself.
  const std::vector<int>& neighbors(int k) const { return neighbors_.at(k); }
  bool has_link(int from, int to) const;
  void write_edge_list_csv(const std::string& path) const;

 private:
  Eigen::MatrixXd abar_;
  std::vector<std::vector<int>> neighbors_;
};

// Spatially-uncorrelated random combination process over a fixed set of
// directed links; the diagonal absorbs whatever the off-diagonal draws leave
// so every realization is left-stochastic.
class CombinationModel {
 public:
  CombinationModel(int agents, std::map<std::pair<int, int>, LinkModel> links);

  int agents() const { return agents_; }
  const std::map<std::pair<int, int>, LinkModel>& links() const { return links_; }
  MeanGraph mean_graph() const;

 private:
  int agents_ = 0;
  std::map<std::pair<int, int>, LinkModel> links_;  // key = (l, k)
};

// Draws the diagonal step-size matrix, one independent entry per agent.
Eigen::VectorXd sample_step_matrix(const std::vector<StepSizeModel>& models,
                                   RandomStream& rng);

// Draws a combination matrix realization: off-diagonal entries per link model
// in (k, l) order, diagonal absorbed to make each column sum to one exactly.
Eigen::MatrixXd sample_combination_matrix(const MeanGraph& graph,
                                          const CombinationModel& model,
                                          RandomStream& rng);

// First and second moments of the joint step-size / combination process.
// Kronecker-covariance matrices are dense only up to kDenseMomentLimit
// agents; beyond that only the structured per-link representation is kept.
struct MomentSet {
  static constexpr int kDenseMomentLimit = 32;

  Eigen::VectorXd mu_bar;        // diagonal of E[M_i]
  Eigen::MatrixXd abar;          // E[A_i]
  Eigen::MatrixXd c_m;           // E[(M - Mbar) (x) (M - Mbar)], N^2 x N^2
  Eigen::MatrixXd c_a;           // E[(A - Abar) (x) (A - Abar)], N^2 x N^2
  Eigen::VectorXd mu_m1, mu_m2, mu_m4;  // per-agent raw step-size moments

  // Structured second-moment data (always present for analytic sets).
  Eigen::VectorXd c_mu_diag;                       // var of mu_k(i)
  std::map<std::pair<int, int>, double> c_a_link;  // var of a_lk(i), l != k

  // Standard errors; populated only by empirical_moments.
  Eigen::VectorXd mu_bar_se, mu_m1_se, mu_m2_se, mu_m4_se;
  Eigen::MatrixXd abar_se, c_m_se, c_a_se;

  std::size_t n_samples = 0;  // 0 for analytic sets
  int agents = 0;

  bool has_dense_covariances() const { return c_a.size() > 0; }
  // Entry of C_A from the spatially-uncorrelated pattern; works at any N.
  double c_a_entry(int l, int k, int n, int m,
                   const std::vector<std::vector<int>>& neighbors) const;
};

MomentSet analytic_moments(const MeanGraph& graph,
                           const std::vector<StepSizeModel>& steps,
                           const CombinationModel& model);

// Two-pass Monte-Carlo estimate (the stream is replayed for the second pass);
// every entry carries a standard error. Requires n_samples >= 1e4.
MomentSet empirical_moments(const MeanGraph& graph,
                            const std::vector<StepSizeModel>& steps,
                            const CombinationModel& model,
                            std::size_t n_samples, RandomStream& rng);

struct StochasticityReport {
  bool pass = true;
  std::vector<std::string> failures;  // each names the failing column/entry
};

// Checks that Abar and Abar (x) Abar + C_A are left-stochastic (column sums
// within 1e-12 of one, entries >= -1e-14). With an empirical set, also checks
// E[A (x) A] against Abar (x) Abar + C_A within 3 standard errors.
StochasticityReport check_left_stochastic(const MomentSet& analytic,
                                          const MomentSet* empirical = nullptr);

// Unions realized supports over enough draws that every link appears with
// probability >= 1 - 1e-6, then returns the per-agent union (sorted, with k
// included). n_samples = 0 lets the model pick that count.
std::vector<std::vector<int>> neighborhood_union(const MeanGraph& graph,
                                                 const CombinationModel& model,
                                                 RandomStream& rng,
                                                 std::size_t n_samples = 0);

}  // namespace asyncnet

#endif  // ASYNCNET_NETWORK_MODEL_HPP
