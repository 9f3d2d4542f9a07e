#include "asyncnet/network_model.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "asyncnet/csv.hpp"

namespace asyncnet {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

StepSizeModel StepSizeModel::constant(double mu) {
  require(mu > 0.0 && std::isfinite(mu), "step-size mu must be finite and > 0");
  StepSizeModel m;
  m.kind = Kind::Constant;
  m.mu = mu;
  return m;
}

StepSizeModel StepSizeModel::bernoulli(double q, double mu) {
  require(q > 0.0 && q < 1.0, "Bernoulli step-size requires 0 < q < 1");
  require(mu > 0.0 && std::isfinite(mu), "step-size mu must be finite and > 0");
  StepSizeModel m;
  m.kind = Kind::Bernoulli;
  m.q = q;
  m.mu = mu;
  return m;
}

StepSizeModel StepSizeModel::beta(double xi, double zeta, double mu) {
  require(xi > 0.0 && zeta > 0.0, "Beta shape parameters must be > 0");
  require(mu > 0.0 && std::isfinite(mu), "step-size mu must be finite and > 0");
  StepSizeModel m;
  m.kind = Kind::Beta;
  m.xi = xi;
  m.zeta = zeta;
  m.mu = mu;
  return m;
}

double StepSizeModel::mean() const {
  switch (kind) {
    case Kind::Constant: return mu;
    case Kind::Bernoulli: return q * mu;
    case Kind::Beta: return xi / (xi + zeta) * mu;
  }
  return 0.0;
}

double StepSizeModel::variance() const {
  switch (kind) {
    case Kind::Constant: return 0.0;
    case Kind::Bernoulli: return q * (1.0 - q) * mu * mu;
    case Kind::Beta:
      return xi * zeta / ((xi + zeta) * (xi + zeta) * (xi + zeta + 1.0)) * mu * mu;
  }
  return 0.0;
}

double StepSizeModel::moment(int m) const {
  require(m >= 1, "moment order must be >= 1");
  const double mu_m = std::pow(mu, m);
  switch (kind) {
    case Kind::Constant: return mu_m;
    case Kind::Bernoulli: return q * mu_m;
    case Kind::Beta: {
      double prod = 1.0;
      for (int j = 0; j < m; ++j) prod *= (xi + j) / (xi + zeta + j);
      return mu_m * prod;
    }
  }
  return 0.0;
}

double StepSizeModel::sample(RandomStream& rng) const {
  switch (kind) {
    case Kind::Constant: return mu;
    case Kind::Bernoulli: return rng.bernoulli(q) ? mu : 0.0;
    case Kind::Beta: return mu * rng.beta(xi, zeta);
  }
  return 0.0;
}

double StepSizeModel::nonzero_probability() const {
  return kind == Kind::Bernoulli ? q : 1.0;
}

LinkModel LinkModel::bernoulli(double eta, double a) {
  require(eta > 0.0 && eta <= 1.0, "link on-probability must be in (0, 1]");
  require(a > 0.0 && a < 1.0, "link weight must be in (0, 1)");
  LinkModel m;
  m.kind = Kind::Bernoulli;
  m.eta = eta;
  m.a = a;
  return m;
}

LinkModel LinkModel::beta(double xi, double zeta, double a) {
  require(xi > 0.0 && zeta > 0.0, "Beta shape parameters must be > 0");
  require(a > 0.0 && a < 1.0, "link weight must be in (0, 1)");
  LinkModel m;
  m.kind = Kind::Beta;
  m.xi = xi;
  m.zeta = zeta;
  m.a = a;
  return m;
}

double LinkModel::mean() const {
  return kind == Kind::Bernoulli ? eta * a : xi / (xi + zeta) * a;
}

double LinkModel::variance() const {
  if (kind == Kind::Bernoulli) return eta * (1.0 - eta) * a * a;
  return xi * zeta / ((xi + zeta) * (xi + zeta) * (xi + zeta + 1.0)) * a * a;
}

double LinkModel::sample(RandomStream& rng) const {
  if (kind == Kind::Bernoulli) return rng.bernoulli(eta) ? a : 0.0;
  return a * rng.beta(xi, zeta);
}

double LinkModel::nonzero_probability() const {
  return kind == Kind::Bernoulli ? eta : 1.0;
}

MeanGraph::MeanGraph(Eigen::MatrixXd abar, std::vector<std::vector<int>> neighbors)
    : abar_(std::move(abar)), neighbors_(std::move(neighbors)) {
  const int n = static_cast<int>(abar_.cols());
  require(n >= 1 && abar_.rows() == abar_.cols(), "mean matrix must be square");
  require(static_cast<int>(neighbors_.size()) == n,
          "neighborhood list size must match agent count");
  for (int k = 0; k < n; ++k) {
    double col_sum = 0.0;
    for (int l = 0; l < n; ++l) {
      require(abar_(l, k) >= -1e-14, "mean matrix entries must be nonnegative");
      col_sum += abar_(l, k);
    }
    require(std::abs(col_sum - 1.0) <= 1e-12,
            "mean matrix column " + std::to_string(k) + " must sum to 1");
    auto& nbrs = neighbors_[k];
    std::sort(nbrs.begin(), nbrs.end());
    require(std::binary_search(nbrs.begin(), nbrs.end(), k),
            "neighborhood of agent " + std::to_string(k) + " must include itself");
    for (int l = 0; l < n; ++l) {
      if (l == k) continue;  // the absorbed diagonal may be zero
      const bool in_set = std::binary_search(nbrs.begin(), nbrs.end(), l);
      require((abar_(l, k) > 0.0) == in_set,
              "support of column " + std::to_string(k) +
                  " disagrees with its neighborhood");
    }
  }

  // Strong connectivity over directed edges l -> k with abar(l, k) > 0.
  auto reach_count = [&](bool reverse) {
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int u = 0; u < n; ++u) {
        const double w = reverse ? abar_(v, u) : abar_(u, v);
        if (u != v && w > 0.0 && !seen[u]) {
          seen[u] = 1;
          ++count;
          queue.push_back(u);
        }
      }
    }
    return count;
  };
  require(reach_count(false) == n && reach_count(true) == n,
          "mean graph must be connected");
}

bool MeanGraph::has_link(int from, int to) const {
  return abar_(from, to) > 0.0;
}

void MeanGraph::write_edge_list_csv(const std::string& path) const {
  CsvWriter csv(path, {"from", "to", "abar"});
  for (int k = 0; k < agents(); ++k) {
    for (int l = 0; l < agents(); ++l) {
      if (abar_(l, k) <= 0.0) continue;
      csv.begin_row();
      csv.add(static_cast<long long>(l));
      csv.add(static_cast<long long>(k));
      csv.add(abar_(l, k));
      csv.end_row();
    }
  }
}

CombinationModel::CombinationModel(int agents,
                                   std::map<std::pair<int, int>, LinkModel> links)
    : agents_(agents), links_(std::move(links)) {
  require(agents_ >= 1, "agent count must be >= 1");
  Eigen::VectorXd column_max = Eigen::VectorXd::Zero(agents_);
  for (const auto& [key, model] : links_) {
    const auto [l, k] = key;
    require(l >= 0 && l < agents_ && k >= 0 && k < agents_,
            "link endpoints out of range");
    require(l != k, "diagonal weights are absorbed, not modeled");
    column_max(k) += model.a;
  }
  for (int k = 0; k < agents_; ++k) {
    require(column_max(k) <= 1.0 + 1e-12,
            "agent " + std::to_string(k) + " receives weights summing to " +
                std::to_string(column_max(k)) + " which exceeds 1");
  }
}

MeanGraph CombinationModel::mean_graph() const {
  Eigen::MatrixXd abar = Eigen::MatrixXd::Zero(agents_, agents_);
  std::vector<std::vector<int>> neighbors(agents_);
  for (int k = 0; k < agents_; ++k) neighbors[k].push_back(k);
  for (const auto& [key, model] : links_) {
    const auto [l, k] = key;
    abar(l, k) = model.mean();
    neighbors[k].push_back(l);
  }
  for (int k = 0; k < agents_; ++k) {
    double off = 0.0;
    for (int l = 0; l < agents_; ++l)
      if (l != k) off += abar(l, k);
    abar(k, k) = 1.0 - off;
  }
  return MeanGraph(std::move(abar), std::move(neighbors));
}

Eigen::VectorXd sample_step_matrix(const std::vector<StepSizeModel>& models,
                                   RandomStream& rng) {
  Eigen::VectorXd diag(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) diag(k) = models[k].sample(rng);
  return diag;
}

Eigen::MatrixXd sample_combination_matrix(const MeanGraph& graph,
                                          const CombinationModel& model,
                                          RandomStream& rng) {
  const int n = graph.agents();
  require(model.agents() == n, "model and graph agent counts differ");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  // Draw order: columns ascending, then rows ascending within a column.
  for (int k = 0; k < n; ++k) {
    double off = 0.0;
    for (int l : graph.neighbors(k)) {
      if (l == k) continue;
      const auto it = model.links().find({l, k});
      require(it != model.links().end(), "mean graph link without a model");
      a(l, k) = it->second.sample(rng);
      off += a(l, k);
    }
    double diag = 1.0 - off;
    if (diag < 0.0) {
      if (diag < -1e-12)
        throw std::logic_error("absorbed diagonal went negative");
      diag = 0.0;
    }
    a(k, k) = diag;
  }
  return a;
}

double MomentSet::c_a_entry(int l, int k, int n, int m,
                            const std::vector<std::vector<int>>& neighbors) const {
  if (k != m) return 0.0;
  const auto& nbrs = neighbors.at(k);
  auto is_neighbor = [&](int x) {
    return x != k && std::binary_search(nbrs.begin(), nbrs.end(), x);
  };
  auto link_var = [&](int from) {
    const auto it = c_a_link.find({from, k});
    return it == c_a_link.end() ? 0.0 : it->second;
  };
  if (l != k && n != k) {
    if (l == n && is_neighbor(l)) return link_var(l);
    return 0.0;
  }
  if (l != k && n == k) return is_neighbor(l) ? -link_var(l) : 0.0;
  if (l == k && n != k) return is_neighbor(n) ? -link_var(n) : 0.0;
  double total = 0.0;  // l == k == n
  for (int j : nbrs)
    if (j != k) total += link_var(j);
  return total;
}

MomentSet analytic_moments(const MeanGraph& graph,
                           const std::vector<StepSizeModel>& steps,
                           const CombinationModel& model) {
  const int n = graph.agents();
  require(static_cast<int>(steps.size()) == n,
          "one step-size model per agent required");
  MomentSet ms;
  ms.agents = n;
  ms.abar = graph.mean_matrix();
  ms.mu_bar.resize(n);
  ms.c_mu_diag.resize(n);
  ms.mu_m1.resize(n);
  ms.mu_m2.resize(n);
  ms.mu_m4.resize(n);
  for (int k = 0; k < n; ++k) {
    ms.mu_bar(k) = steps[k].mean();
    ms.c_mu_diag(k) = steps[k].variance();
    ms.mu_m1(k) = steps[k].moment(1);
    ms.mu_m2(k) = steps[k].moment(2);
    ms.mu_m4(k) = steps[k].moment(4);
  }
  for (const auto& [key, link] : model.links()) ms.c_a_link[key] = link.variance();

  if (n <= MomentSet::kDenseMomentLimit) {
    ms.c_m = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int k = 0; k < n; ++k) ms.c_m(k * n + k, k * n + k) = ms.c_mu_diag(k);
    std::vector<std::vector<int>> nbrs(n);
    for (int k = 0; k < n; ++k) nbrs[k] = graph.neighbors(k);
    ms.c_a = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k)
        for (int p = 0; p < n; ++p)
          for (int m = 0; m < n; ++m)
            ms.c_a(l * n + p, k * n + m) = ms.c_a_entry(l, k, p, m, nbrs);
  }
  return ms;
}

MomentSet empirical_moments(const MeanGraph& graph,
                            const std::vector<StepSizeModel>& steps,
                            const CombinationModel& model,
                            std::size_t n_samples, RandomStream& rng) {
  require(n_samples >= 10000, "empirical moments require n_samples >= 1e4");
  const int n = graph.agents();
  require(static_cast<int>(steps.size()) == n,
          "one step-size model per agent required");

  MomentSet ms;
  ms.agents = n;
  ms.n_samples = n_samples;
  const double count = static_cast<double>(n_samples);

  // Pass 1: sample means of the step-size diagonal, its powers, and A.
  RandomStream replay = rng;  // copy of the starting position for pass 2
  Eigen::VectorXd mu_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu_sumsq = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd m2_sum = Eigen::VectorXd::Zero(n), m2_sumsq = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd m4_sum = Eigen::VectorXd::Zero(n), m4_sumsq = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd a_sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd a_sumsq = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd mu = sample_step_matrix(steps, rng);
    const Eigen::MatrixXd a = sample_combination_matrix(graph, model, rng);
    for (int k = 0; k < n; ++k) {
      const double m1 = mu(k), m2 = m1 * m1, m4 = m2 * m2;
      mu_sum(k) += m1;
      mu_sumsq(k) += m2;
      m2_sum(k) += m2;
      m2_sumsq(k) += m2 * m2;
      m4_sum(k) += m4;
      m4_sumsq(k) += m4 * m4;
    }
    a_sum += a;
    a_sumsq += a.cwiseProduct(a);
  }
  auto se_of = [count](double sum, double sumsq) {
    const double mean = sum / count;
    const double var = std::max(0.0, sumsq / count - mean * mean);
    return std::sqrt(var / count);
  };
  ms.mu_bar = mu_sum / count;
  ms.mu_m1 = ms.mu_bar;
  ms.mu_m2 = m2_sum / count;
  ms.mu_m4 = m4_sum / count;
  ms.abar = a_sum / count;
  ms.mu_bar_se.resize(n);
  ms.mu_m1_se.resize(n);
  ms.mu_m2_se.resize(n);
  ms.mu_m4_se.resize(n);
  for (int k = 0; k < n; ++k) {
    ms.mu_bar_se(k) = se_of(mu_sum(k), mu_sumsq(k));
    ms.mu_m1_se(k) = ms.mu_bar_se(k);
    ms.mu_m2_se(k) = se_of(m2_sum(k), m2_sumsq(k));
    ms.mu_m4_se(k) = se_of(m4_sum(k), m4_sumsq(k));
  }
  ms.abar_se.resize(n, n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      ms.abar_se(l, k) = se_of(a_sum(l, k), a_sumsq(l, k));

  // Pass 2 (replayed draws): centered Kronecker second moments.
  Eigen::MatrixXd cm_sum = Eigen::MatrixXd::Zero(n * n, n * n);
  Eigen::MatrixXd cm_sumsq = Eigen::MatrixXd::Zero(n * n, n * n);
  Eigen::MatrixXd ca_sum = Eigen::MatrixXd::Zero(n * n, n * n);
  Eigen::MatrixXd ca_sumsq = Eigen::MatrixXd::Zero(n * n, n * n);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd mu = sample_step_matrix(steps, replay);
    const Eigen::MatrixXd a = sample_combination_matrix(graph, model, replay);
    const Eigen::VectorXd dmu = mu - ms.mu_bar;
    const Eigen::MatrixXd da = a - ms.abar;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const double z = dmu(k) * dmu(l);
        cm_sum(k * n + l, k * n + l) += z;
        cm_sumsq(k * n + l, k * n + l) += z * z;
      }
    }
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) {
        const double left = da(l, k);
        if (left == 0.0) continue;
        for (int p = 0; p < n; ++p)
          for (int m = 0; m < n; ++m) {
            const double z = left * da(p, m);
            ca_sum(l * n + p, k * n + m) += z;
            ca_sumsq(l * n + p, k * n + m) += z * z;
          }
      }
  }
  ms.c_m = cm_sum / count;
  ms.c_a = ca_sum / count;
  ms.c_m_se.resize(n * n, n * n);
  ms.c_a_se.resize(n * n, n * n);
  for (int r = 0; r < n * n; ++r)
    for (int c = 0; c < n * n; ++c) {
      ms.c_m_se(r, c) = se_of(cm_sum(r, c), cm_sumsq(r, c));
      ms.c_a_se(r, c) = se_of(ca_sum(r, c), ca_sumsq(r, c));
    }

  ms.c_mu_diag.resize(n);
  for (int k = 0; k < n; ++k) ms.c_mu_diag(k) = ms.c_m(k * n + k, k * n + k);
  for (const auto& [key, link] : model.links()) {
    const auto [l, k] = key;
    ms.c_a_link[key] = ms.c_a(l * n + l, k * n + k);
  }
  return ms;
}

StochasticityReport check_left_stochastic(const MomentSet& analytic,
                                          const MomentSet* empirical) {
  StochasticityReport report;
  auto fail = [&](const std::string& what) {
    report.pass = false;
    report.failures.push_back(what);
  };

  const int n = analytic.agents;
  for (int k = 0; k < n; ++k) {
    const double sum = analytic.abar.col(k).sum();
    if (std::abs(sum - 1.0) > 1e-12)
      fail("column " + std::to_string(k) + " of Abar sums to " + format_double(sum));
    if (analytic.abar.col(k).minCoeff() < -1e-14)
      fail("column " + std::to_string(k) + " of Abar has a negative entry");
  }

  if (!analytic.has_dense_covariances())
    throw std::invalid_argument(
        "left-stochasticity check needs dense covariance matrices");
  const Eigen::MatrixXd second =
      Eigen::kroneckerProduct(analytic.abar, analytic.abar) + analytic.c_a;
  for (int c = 0; c < n * n; ++c) {
    const double sum = second.col(c).sum();
    if (std::abs(sum - 1.0) > 1e-12)
      fail("column " + std::to_string(c) + " of Abar(x)Abar + C_A sums to " +
           format_double(sum));
    if (second.col(c).minCoeff() < -1e-14)
      fail("column " + std::to_string(c) +
           " of Abar(x)Abar + C_A has a negative entry");
  }

  if (empirical != nullptr) {
    if (!empirical->has_dense_covariances() || empirical->n_samples == 0)
      throw std::invalid_argument("empirical moment set lacks dense covariances");
    const Eigen::MatrixXd emp_second =
        Eigen::kroneckerProduct(empirical->abar, empirical->abar) + empirical->c_a;
    for (int r = 0; r < n * n; ++r)
      for (int c = 0; c < n * n; ++c) {
        const int l = r / n, p = r % n, k = c / n, m = c % n;
        // SE of the kron-of-means term propagated conservatively.
        const double se = empirical->c_a_se(r, c) +
                          std::abs(empirical->abar(l, k)) * empirical->abar_se(p, m) +
                          std::abs(empirical->abar(p, m)) * empirical->abar_se(l, k);
        const double diff = std::abs(second(r, c) - emp_second(r, c));
        if (diff > 3.0 * se + 1e-12)
          fail("E[A(x)A] entry (" + std::to_string(r) + "," + std::to_string(c) +
               ") deviates by " + format_double(diff) + " > 3 SE");
      }
  }
  return report;
}

std::vector<std::vector<int>> neighborhood_union(const MeanGraph& graph,
                                                 const CombinationModel& model,
                                                 RandomStream& rng,
                                                 std::size_t n_samples) {
  const int n = graph.agents();
  if (n_samples == 0) {
    // Enough draws that each link shows up with probability >= 1 - 1e-6.
    double worst = 1.0;
    for (const auto& [key, link] : model.links())
      worst = std::min(worst, link.nonzero_probability());
    if (worst >= 1.0) {
      n_samples = 1;
    } else {
      n_samples = static_cast<std::size_t>(
          std::ceil(std::log(1e-6) / std::log(1.0 - worst)));
    }
  }
  std::vector<std::vector<char>> seen(n, std::vector<char>(n, 0));
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Eigen::MatrixXd a = sample_combination_matrix(graph, model, rng);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        if (a(l, k) > 0.0) seen[k][l] = 1;
  }
  std::vector<std::vector<int>> unions(n);
  for (int k = 0; k < n; ++k) {
    unions[k].push_back(k);  // self always participates in the combination
    for (int l = 0; l < n; ++l)
      if (l != k && seen[k][l]) unions[k].push_back(l);
    std::sort(unions[k].begin(), unions[k].end());
    unions[k].erase(std::unique(unions[k].begin(), unions[k].end()),
                    unions[k].end());
  }
  return unions;
}

}  // namespace asyncnet
