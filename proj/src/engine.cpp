#include "asyncnet/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "asyncnet/csv.hpp"

namespace asyncnet {

namespace {

constexpr double kDivergenceThreshold = 1e12;

// Deterministic pairwise reduction over [lo, hi); order does not depend on
// how trials were scheduled across workers.
template <typename F>
double pairwise_sum(std::size_t lo, std::size_t hi, const F& value) {
  const std::size_t count = hi - lo;
  if (count == 0) return 0.0;
  if (count <= 4) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += value(i);
    return s;
  }
  const std::size_t mid = lo + count / 2;
  return pairwise_sum(lo, mid, value) + pairwise_sum(mid, hi, value);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ASYNCNET_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(std::min(v, 64L));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

}  // namespace

NetworkState make_initial_state(int agents, const ComplexVec& init) {
  NetworkState state;
  state.w.assign(agents, init);
  state.psi.assign(agents, ComplexVec::Zero(init.size()));
  return state;
}

StepDraws draw_step(const MeanGraph& graph, const CombinationModel& cm,
                    const std::vector<StepSizeModel>& steps,
                    const std::vector<const Cost*>& costs, RandomStream& rng) {
  StepDraws draws;
  draws.a = sample_combination_matrix(graph, cm, rng);
  draws.m = sample_step_matrix(steps, rng);
  draws.data.reserve(costs.size());
  for (const Cost* cost : costs) draws.data.push_back(cost->sample_data(rng));
  return draws;
}

void atc_step(NetworkState& state, const Eigen::MatrixXd& a,
              const Eigen::VectorXd& m, const std::vector<DataSample>& data,
              const std::vector<const Cost*>& costs) {
  const int n = static_cast<int>(state.w.size());
  if (a.rows() != n || a.cols() != n || m.size() != n ||
      static_cast<int>(data.size()) != n || static_cast<int>(costs.size()) != n)
    throw std::invalid_argument("atc_step input dimensions disagree");

  for (int k = 0; k < n; ++k)
    state.psi[k] =
        state.w[k] - m(k) * costs[k]->stochastic_gradient(state.w[k], data[k]);

  for (int k = 0; k < n; ++k) {
    ComplexVec next = ComplexVec::Zero(state.psi[0].size());
    for (int l = 0; l < n; ++l)
      if (a(l, k) != 0.0) next += a(l, k) * state.psi[l];
    state.w[k] = std::move(next);
    if (!state.w[k].allFinite()) state.diverged = true;
  }
  ++state.iteration;
}

ErrorState make_error_state(const std::vector<const Cost*>& costs,
                            const ComplexVec& init_w) {
  ErrorState state;
  state.err.reserve(costs.size());
  for (const Cost* cost : costs)
    state.err.push_back(embed_conjugate(cost->minimizer() - init_w));
  return state;
}

void error_step(ErrorState& state, const Eigen::MatrixXd& a,
                const Eigen::VectorXd& m,
                const std::vector<Eigen::VectorXcd>& noise_ext,
                const std::vector<const Cost*>& costs) {
  const int n = static_cast<int>(state.err.size());
  if (a.rows() != n || a.cols() != n || m.size() != n ||
      static_cast<int>(noise_ext.size()) != n ||
      static_cast<int>(costs.size()) != n)
    throw std::invalid_argument("error_step input dimensions disagree");

  std::vector<Eigen::VectorXcd> psi(n);
  for (int k = 0; k < n; ++k) {
    const auto* quadratic = dynamic_cast<const QuadraticCost*>(costs[k]);
    if (quadratic == nullptr)
      throw std::invalid_argument(
          "error-form recursion requires quadratic costs (constant Hessian)");
    const Eigen::MatrixXcd& r = quadratic->regressor_covariance();
    const Eigen::Index dim = r.rows();
    if (state.err[k].size() != 2 * dim || noise_ext[k].size() != 2 * dim)
      throw std::invalid_argument("error_step vector dimensions disagree");
    // (I - m H) err + m noise with H = blkdiag(R, R^T); the blocks act on the
    // two halves of the conjugate embedding independently.
    Eigen::VectorXcd out(2 * dim);
    out.head(dim) = state.err[k].head(dim) - m(k) * (r * state.err[k].head(dim)) +
                    m(k) * noise_ext[k].head(dim);
    out.tail(dim) = state.err[k].tail(dim) -
                    m(k) * (r.transpose() * state.err[k].tail(dim)) +
                    m(k) * noise_ext[k].tail(dim);
    psi[k] = std::move(out);
  }
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(psi[0].size());
    for (int l = 0; l < n; ++l)
      if (a(l, k) != 0.0) next += a(l, k) * psi[l];
    state.err[k] = std::move(next);
  }
}

namespace {

struct TrialSlab {
  Eigen::MatrixXd err_sq;     // rows x agents, ||w_opt - w_k||^2
  Eigen::VectorXd pair_mean;  // rows
  Eigen::VectorXd pair_max;   // rows
  bool diverged = false;
  long divergence_iter = -1;
};

void run_trial(const ExperimentSetup& setup, std::size_t horizon,
               std::uint64_t seed, TrialSlab& slab) {
  const auto& costs = *setup.costs;
  const int n = static_cast<int>(costs.size());
  RandomStream rng(seed);
  const ComplexVec init = setup.init_w.size() > 0
                              ? setup.init_w
                              : ComplexVec::Zero(costs.front()->dim());
  NetworkState state = make_initial_state(n, init);

  const std::size_t rows = horizon + 1;
  slab.err_sq.resize(rows, n);
  slab.pair_mean.resize(rows);
  slab.pair_max.resize(rows);

  auto record_row = [&](std::size_t row) -> bool {
    bool finite = true;
    for (int k = 0; k < n; ++k) {
      const double e2 = (costs[k]->minimizer() - state.w[k]).squaredNorm();
      slab.err_sq(row, k) = e2;
      if (!std::isfinite(e2)) finite = false;
    }
    double sum = 0.0, worst = 0.0;
    int pairs = 0;
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l < n; ++l) {
        const double d = (state.w[k] - state.w[l]).squaredNorm();
        sum += d;
        worst = std::max(worst, d);
        ++pairs;
      }
    slab.pair_mean(row) = pairs > 0 ? sum / pairs : 0.0;
    slab.pair_max(row) = worst;
    if (!std::isfinite(slab.pair_mean(row))) finite = false;
    return finite;
  };

  record_row(0);
  for (std::size_t i = 1; i <= horizon; ++i) {
    const StepDraws draws =
        draw_step(*setup.graph, *setup.combination, *setup.steps, costs, rng);
    atc_step(state, draws.a, draws.m, draws.data, costs);

    const bool finite = record_row(i);
    const double worst_err = slab.err_sq.row(i).maxCoeff();
    if (!finite || state.diverged || worst_err > kDivergenceThreshold) {
      slab.diverged = true;
      slab.divergence_iter = static_cast<long>(i);
      // Freeze the series at the last finite row so aggregates stay finite.
      const std::size_t frozen = finite ? i : i - 1;
      for (std::size_t r = frozen + 1; r < rows; ++r) {
        slab.err_sq.row(r) = slab.err_sq.row(frozen);
        slab.pair_mean(r) = slab.pair_mean(frozen);
        slab.pair_max(r) = slab.pair_max(frozen);
      }
      break;
    }
  }
}

}  // namespace

ExperimentRecord run_experiment(const ExperimentSetup& setup,
                                std::size_t n_trials, std::size_t horizon,
                                std::uint64_t base_seed) {
  if (setup.graph == nullptr || setup.combination == nullptr ||
      setup.steps == nullptr || setup.costs == nullptr)
    throw std::invalid_argument("experiment setup is incomplete");
  if (n_trials < 1) throw std::invalid_argument("need at least one trial");
  const int n = static_cast<int>(setup.costs->size());

  std::vector<TrialSlab> slabs(n_trials);
  std::atomic<std::size_t> next{0};
  const int workers =
      static_cast<int>(std::min<std::size_t>(resolve_threads(setup.threads), n_trials));
  auto work = [&]() {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= n_trials) return;
      run_trial(setup, horizon, base_seed ^ t, slabs[t]);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ExperimentRecord record;
  record.agents = n;
  record.horizon = horizon;
  record.n_trials = n_trials;
  record.base_seed = base_seed;
  record.trial_seeds.resize(n_trials);
  record.trial_diverged.resize(n_trials);
  record.trial_divergence_iter.resize(n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) {
    record.trial_seeds[t] = base_seed ^ t;
    record.trial_diverged[t] = slabs[t].diverged ? 1 : 0;
    record.trial_divergence_iter[t] = slabs[t].divergence_iter;
    if (slabs[t].diverged) ++record.n_diverged;
  }

  std::vector<std::size_t> included;
  included.reserve(n_trials);
  const bool drop = setup.exclude_divergent && record.n_diverged > 0 &&
                    record.n_diverged < n_trials;
  for (std::size_t t = 0; t < n_trials; ++t)
    if (!drop || !slabs[t].diverged) included.push_back(t);
  record.divergent_excluded = drop;

  const std::size_t rows = horizon + 1;
  const double count = static_cast<double>(included.size());
  record.msd.resize(rows, n);
  record.msd_se.resize(rows, n);
  record.msd_max.resize(rows);
  record.msd_max_se.resize(rows);
  record.disagreement.resize(rows);
  record.disagreement_se.resize(rows);
  record.disagreement_max.resize(rows);
  record.disagreement_max_se.resize(rows);
  record.m4_max.resize(rows);
  record.m4_max_se.resize(rows);

  auto mean_se = [&](const auto& value) -> std::pair<double, double> {
    const double sum =
        pairwise_sum(0, included.size(), [&](std::size_t i) { return value(included[i]); });
    const double mean = sum / count;
    const double sumsq = pairwise_sum(0, included.size(), [&](std::size_t i) {
      const double d = value(included[i]) - mean;
      return d * d;
    });
    const double se =
        count > 1 ? std::sqrt(sumsq / (count - 1.0) / count) : 0.0;
    return {mean, se};
  };

  Eigen::MatrixXd m4(rows, n), m4_se(rows, n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (int k = 0; k < n; ++k) {
      const auto [mean2, se2] =
          mean_se([&](std::size_t t) { return slabs[t].err_sq(r, k); });
      record.msd(r, k) = mean2;
      record.msd_se(r, k) = se2;
      const auto [mean4, se4] = mean_se([&](std::size_t t) {
        const double e = slabs[t].err_sq(r, k);
        return e * e;
      });
      m4(r, k) = mean4;
      m4_se(r, k) = se4;
    }
    Eigen::Index worst2, worst4;
    record.msd_max(r) = record.msd.row(r).maxCoeff(&worst2);
    record.msd_max_se(r) = record.msd_se(r, worst2);
    record.m4_max(r) = m4.row(r).maxCoeff(&worst4);
    record.m4_max_se(r) = m4_se(r, worst4);

    const auto [dmean, dse] =
        mean_se([&](std::size_t t) { return slabs[t].pair_mean(r); });
    record.disagreement(r) = dmean;
    record.disagreement_se(r) = dse;
    const auto [dmax, dmax_se] =
        mean_se([&](std::size_t t) { return slabs[t].pair_max(r); });
    record.disagreement_max(r) = dmax;
    record.disagreement_max_se(r) = dmax_se;
  }
  return record;
}

SteadyState steady_state(const Eigen::VectorXd& series,
                         const Eigen::VectorXd& series_se,
                         double window_fraction) {
  if (!(window_fraction > 0.0) || window_fraction > 0.5)
    throw std::invalid_argument("window fraction must be in (0, 0.5]");
  if (series.size() != series_se.size())
    throw std::invalid_argument("series and SE lengths differ");
  const Eigen::Index len = series.size();
  const Eigen::Index window =
      static_cast<Eigen::Index>(std::floor(window_fraction * static_cast<double>(len)));
  if (window < 10)
    throw std::invalid_argument("steady-state window shorter than 10 samples");

  const auto values = series.tail(window);
  const auto ses = series_se.tail(window);
  SteadyState out;
  out.value = values.mean();
  const double spread =
      window > 1
          ? std::sqrt((values.array() - out.value).square().sum() /
                      static_cast<double>(window - 1))
          : 0.0;
  out.se = std::max(ses.mean(), spread);
  return out;
}

void write_timeseries_csv(const ExperimentRecord& record,
                          const std::string& path) {
  CsvWriter csv(path, {"iter", "agent", "msd", "msd_se", "disagreement",
                       "disagreement_se", "m4", "m4_se"});
  for (std::size_t r = 0; r < record.rows(); ++r) {
    for (int k = 0; k < record.agents; ++k) {
      csv.begin_row();
      csv.add(r);
      csv.add(static_cast<long long>(k));
      csv.add(record.msd(r, k));
      csv.add(record.msd_se(r, k));
      csv.add(record.disagreement(r));
      csv.add(record.disagreement_se(r));
      csv.add(record.m4_max(r));
      csv.add(record.m4_max_se(r));
      csv.end_row();
    }
  }
}

}  // namespace asyncnet
