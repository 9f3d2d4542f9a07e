#include "asyncnet/config.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace asyncnet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field, message);
}

void expect_keys(const json& node, const std::string& path,
                 const std::set<std::string>& allowed) {
  if (!node.is_object()) fail(path, "must be an object");
  for (const auto& item : node.items())
    if (!allowed.count(item.key()))
      fail(path + "." + item.key(), "unknown key");
}

const json& require_key(const json& node, const std::string& path,
                        const std::string& key) {
  if (!node.contains(key)) fail(path + "." + key, "missing required key");
  return node.at(key);
}

double number(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "must be a number");
  return node.get<double>();
}

std::int64_t integer(const json& node, const std::string& path) {
  if (!node.is_number_integer()) fail(path, "must be an integer");
  return node.get<std::int64_t>();
}

Eigen::VectorXd real_vector(const json& node, const std::string& path,
                            Eigen::Index expected) {
  if (!node.is_array()) fail(path, "must be an array of numbers");
  if (expected >= 0 && static_cast<Eigen::Index>(node.size()) != expected)
    fail(path, "expected " + std::to_string(expected) + " entries");
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = number(node[i], path + "[" + std::to_string(i) + "]");
  return v;
}

ComplexVec complex_vector(const json& node, const std::string& path,
                          Eigen::Index dim) {
  expect_keys(node, path, {"re", "im"});
  const Eigen::VectorXd re = real_vector(require_key(node, path, "re"), path + ".re", dim);
  Eigen::VectorXd im = Eigen::VectorXd::Zero(dim);
  if (node.contains("im")) im = real_vector(node.at("im"), path + ".im", dim);
  ComplexVec out(dim);
  for (Eigen::Index i = 0; i < dim; ++i) out(i) = {re(i), im(i)};
  return out;
}

Eigen::MatrixXcd parse_regressors(const json& node, const std::string& path,
                                  Eigen::Index dim) {
  expect_keys(node, path, {"type", "values", "re", "im"});
  const std::string type = require_key(node, path, "type").get<std::string>();
  if (type == "identity") return Eigen::MatrixXcd::Identity(dim, dim);
  if (type == "diagonal") {
    const Eigen::VectorXd values =
        real_vector(require_key(node, path, "values"), path + ".values", dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      if (!(values(i) > 0.0)) fail(path + ".values", "diagonal entries must be > 0");
    return values.cast<std::complex<double>>().asDiagonal();
  }
  if (type == "dense") {
    const json& re = require_key(node, path, "re");
    if (!re.is_array() || static_cast<Eigen::Index>(re.size()) != dim)
      fail(path + ".re", "expected " + std::to_string(dim) + " rows");
    Eigen::MatrixXd real_part(dim, dim), imag_part = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      real_part.row(r) =
          real_vector(re[r], path + ".re[" + std::to_string(r) + "]", dim).transpose();
    if (node.contains("im")) {
      const json& im = node.at("im");
      if (!im.is_array() || static_cast<Eigen::Index>(im.size()) != dim)
        fail(path + ".im", "expected " + std::to_string(dim) + " rows");
      for (Eigen::Index r = 0; r < dim; ++r)
        imag_part.row(r) =
            real_vector(im[r], path + ".im[" + std::to_string(r) + "]", dim).transpose();
    }
    Eigen::MatrixXcd out(dim, dim);
    out.real() = real_part;
    out.imag() = imag_part;
    return out;
  }
  fail(path + ".type", "must be one of identity, diagonal, dense");
}

StepSizeModel parse_step_model(const json& node, const std::string& path) {
  expect_keys(node, path, {"type", "mu", "q", "xi", "zeta"});
  const std::string type = require_key(node, path, "type").get<std::string>();
  const double mu = number(require_key(node, path, "mu"), path + ".mu");
  if (!(mu > 0.0)) fail(path + ".mu", "must be > 0");
  try {
    if (type == "constant") return StepSizeModel::constant(mu);
    if (type == "bernoulli") {
      const double q = number(require_key(node, path, "q"), path + ".q");
      if (!(q > 0.0 && q < 1.0)) fail(path + ".q", "must satisfy 0 < q < 1");
      return StepSizeModel::bernoulli(q, mu);
    }
    if (type == "beta") {
      const double xi = number(require_key(node, path, "xi"), path + ".xi");
      const double zeta = number(require_key(node, path, "zeta"), path + ".zeta");
      if (!(xi > 0.0)) fail(path + ".xi", "must be > 0");
      if (!(zeta > 0.0)) fail(path + ".zeta", "must be > 0");
      return StepSizeModel::beta(xi, zeta, mu);
    }
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(path + ".type", "must be one of constant, bernoulli, beta");
}

struct LinkDefaults {
  std::string type;  // "constant", "bernoulli", "beta"
  double eta = 1.0;
  double xi = 0.0;
  double zeta = 0.0;
};

LinkDefaults parse_combination_defaults(const json& node, const std::string& path) {
  expect_keys(node, path, {"type", "eta", "xi", "zeta"});
  LinkDefaults defaults;
  defaults.type = require_key(node, path, "type").get<std::string>();
  if (defaults.type == "constant") return defaults;
  if (defaults.type == "bernoulli") {
    defaults.eta = number(require_key(node, path, "eta"), path + ".eta");
    if (!(defaults.eta > 0.0 && defaults.eta <= 1.0))
      fail(path + ".eta", "must satisfy 0 < eta <= 1");
    return defaults;
  }
  if (defaults.type == "beta") {
    defaults.xi = number(require_key(node, path, "xi"), path + ".xi");
    defaults.zeta = number(require_key(node, path, "zeta"), path + ".zeta");
    if (!(defaults.xi > 0.0)) fail(path + ".xi", "must be > 0");
    if (!(defaults.zeta > 0.0)) fail(path + ".zeta", "must be > 0");
    return defaults;
  }
  fail(path + ".type", "must be one of constant, bernoulli, beta");
}

LinkModel make_link(const LinkDefaults& defaults, double weight,
                    const std::string& path) {
  try {
    if (defaults.type == "constant") return LinkModel::bernoulli(1.0, weight);
    if (defaults.type == "bernoulli")
      return LinkModel::bernoulli(defaults.eta, weight);
    return LinkModel::beta(defaults.xi, defaults.zeta, weight);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

ExperimentConfig parse_json(const json& root) {
  expect_keys(root, "config",
              {"network", "cost", "noise", "step_model", "combination_model",
               "run", "output", "init"});

  ExperimentConfig cfg;

  // network
  const json& network = require_key(root, "config", "network");
  expect_keys(network, "network", {"agents", "edges"});
  const std::int64_t agents = integer(require_key(network, "network", "agents"),
                                      "network.agents");
  if (agents < 1 || agents > 4096) fail("network.agents", "must be in [1, 4096]");
  cfg.agents = static_cast<int>(agents);

  const json& edges = require_key(network, "network", "edges");
  if (!edges.is_array()) fail("network.edges", "must be an array");
  const json& cm_node = require_key(root, "config", "combination_model");
  const LinkDefaults defaults =
      parse_combination_defaults(cm_node, "combination_model");

  std::map<std::pair<int, int>, LinkModel> links;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "network.edges[" + std::to_string(i) + "]";
    const json& edge = edges[i];
    expect_keys(edge, path, {"from", "to", "weight", "eta", "xi", "zeta"});
    const std::int64_t from = integer(require_key(edge, path, "from"), path + ".from");
    const std::int64_t to = integer(require_key(edge, path, "to"), path + ".to");
    if (from < 0 || from >= agents) fail(path + ".from", "agent id out of range");
    if (to < 0 || to >= agents) fail(path + ".to", "agent id out of range");
    if (from == to) fail(path, "self-weights are absorbed, not configured");
    const double weight = number(require_key(edge, path, "weight"), path + ".weight");
    if (!(weight > 0.0 && weight < 1.0)) fail(path + ".weight", "must be in (0, 1)");

    LinkDefaults local = defaults;
    if (edge.contains("eta")) {
      if (defaults.type != "bernoulli")
        fail(path + ".eta", "eta override needs a bernoulli combination model");
      local.eta = number(edge.at("eta"), path + ".eta");
      if (!(local.eta > 0.0 && local.eta <= 1.0))
        fail(path + ".eta", "must satisfy 0 < eta <= 1");
    }
    if (edge.contains("xi") || edge.contains("zeta")) {
      if (defaults.type != "beta")
        fail(path, "shape overrides need a beta combination model");
      if (edge.contains("xi")) local.xi = number(edge.at("xi"), path + ".xi");
      if (edge.contains("zeta")) local.zeta = number(edge.at("zeta"), path + ".zeta");
      if (!(local.xi > 0.0)) fail(path + ".xi", "must be > 0");
      if (!(local.zeta > 0.0)) fail(path + ".zeta", "must be > 0");
    }
    const auto key = std::make_pair(static_cast<int>(from), static_cast<int>(to));
    if (links.count(key)) fail(path, "duplicate edge");
    links.emplace(key, make_link(local, weight, path));
  }

  try {
    cfg.combination =
        std::make_shared<CombinationModel>(cfg.agents, std::move(links));
  } catch (const std::invalid_argument& e) {
    fail("network.edges", e.what());
  }
  try {
    cfg.graph = std::make_shared<MeanGraph>(cfg.combination->mean_graph());
  } catch (const std::invalid_argument& e) {
    fail("network", e.what());
  }

  // step model: one object for all agents or an array with one per agent
  const json& sm = require_key(root, "config", "step_model");
  if (sm.is_array()) {
    if (static_cast<std::int64_t>(sm.size()) != agents)
      fail("step_model", "need one entry per agent");
    for (std::size_t k = 0; k < sm.size(); ++k)
      cfg.steps.push_back(
          parse_step_model(sm[k], "step_model[" + std::to_string(k) + "]"));
  } else {
    const StepSizeModel shared = parse_step_model(sm, "step_model");
    cfg.steps.assign(cfg.agents, shared);
  }

  // cost
  const json& cost = require_key(root, "config", "cost");
  expect_keys(cost, "cost", {"dim", "w_opt", "regressors", "sigma_n_sq"});
  const std::int64_t dim = integer(require_key(cost, "cost", "dim"), "cost.dim");
  if (dim < 1 || dim > 512) fail("cost.dim", "must be in [1, 512]");
  cfg.dim = static_cast<int>(dim);
  const ComplexVec w_opt =
      complex_vector(require_key(cost, "cost", "w_opt"), "cost.w_opt", cfg.dim);

  std::vector<double> sigma(cfg.agents, 0.0);
  const json& sn = require_key(cost, "cost", "sigma_n_sq");
  if (sn.is_array()) {
    if (static_cast<std::int64_t>(sn.size()) != agents)
      fail("cost.sigma_n_sq", "need one entry per agent");
    for (std::size_t k = 0; k < sn.size(); ++k) {
      sigma[k] = number(sn[k], "cost.sigma_n_sq[" + std::to_string(k) + "]");
      if (sigma[k] < 0.0) fail("cost.sigma_n_sq[" + std::to_string(k) + "]",
                               "must be >= 0");
    }
  } else {
    const double shared = number(sn, "cost.sigma_n_sq");
    if (shared < 0.0) fail("cost.sigma_n_sq", "must be >= 0");
    sigma.assign(cfg.agents, shared);
  }

  const json& regressors = require_key(cost, "cost", "regressors");
  std::vector<Eigen::MatrixXcd> covariances;
  if (regressors.is_array()) {
    if (static_cast<std::int64_t>(regressors.size()) != agents)
      fail("cost.regressors", "need one entry per agent");
    for (std::size_t k = 0; k < regressors.size(); ++k)
      covariances.push_back(parse_regressors(
          regressors[k], "cost.regressors[" + std::to_string(k) + "]", cfg.dim));
  } else {
    covariances.assign(cfg.agents, parse_regressors(regressors, "cost.regressors", cfg.dim));
  }
  for (int k = 0; k < cfg.agents; ++k) {
    try {
      cfg.costs.push_back(
          std::make_shared<QuadraticCost>(covariances[k], w_opt, sigma[k]));
    } catch (const std::invalid_argument& e) {
      fail("cost.regressors", e.what());
    }
  }

  // optional gradient-noise override
  if (root.contains("noise")) {
    const json& noise = root.at("noise");
    expect_keys(noise, "noise", {"alpha", "sigma_v_sq", "alpha4", "sigma_v4_sq"});
    NoiseParams np;
    np.alpha = number(require_key(noise, "noise", "alpha"), "noise.alpha");
    np.sigma_v_sq =
        number(require_key(noise, "noise", "sigma_v_sq"), "noise.sigma_v_sq");
    if (np.alpha < 0.0) fail("noise.alpha", "must be >= 0");
    if (np.sigma_v_sq < 0.0) fail("noise.sigma_v_sq", "must be >= 0");
    for (int k = 0; k < cfg.agents; ++k)
      if (sigma[k] > 0.0 && !(np.sigma_v_sq > 0.0))
        fail("noise.sigma_v_sq", "must be > 0 when measurement noise is present");
    np.alpha4 = noise.contains("alpha4")
                    ? number(noise.at("alpha4"), "noise.alpha4")
                    : np.alpha;
    np.sigma_v4_sq = noise.contains("sigma_v4_sq")
                         ? number(noise.at("sigma_v4_sq"), "noise.sigma_v4_sq")
                         : np.sigma_v_sq;
    if (np.alpha4 < 0.0) fail("noise.alpha4", "must be >= 0");
    if (np.sigma_v4_sq < 0.0) fail("noise.sigma_v4_sq", "must be >= 0");
    cfg.noise_override = np;
  }

  // optional initialization
  if (root.contains("init")) {
    const json& init = root.at("init");
    expect_keys(init, "init", {"w"});
    cfg.init_w = complex_vector(require_key(init, "init", "w"), "init.w", cfg.dim);
  }

  // run settings
  const json& run = require_key(root, "config", "run");
  expect_keys(run, "run", {"trials", "horizon", "base_seed", "window_fraction"});
  const std::int64_t trials = integer(require_key(run, "run", "trials"), "run.trials");
  if (trials < 1) fail("run.trials", "must be >= 1");
  cfg.run.trials = static_cast<std::size_t>(trials);
  const std::int64_t horizon = integer(require_key(run, "run", "horizon"), "run.horizon");
  if (horizon < 0) fail("run.horizon", "must be >= 0");
  cfg.run.horizon = static_cast<std::size_t>(horizon);
  const std::int64_t seed = integer(require_key(run, "run", "base_seed"), "run.base_seed");
  if (seed < 0) fail("run.base_seed", "must be >= 0");
  cfg.run.base_seed = static_cast<std::uint64_t>(seed);
  if (run.contains("window_fraction")) {
    cfg.run.window_fraction =
        number(run.at("window_fraction"), "run.window_fraction");
    if (!(cfg.run.window_fraction > 0.0) || cfg.run.window_fraction > 0.5)
      fail("run.window_fraction", "must be in (0, 0.5]");
  }

  // output
  const json& output = require_key(root, "config", "output");
  expect_keys(output, "output", {"directory"});
  cfg.output_directory =
      require_key(output, "output", "directory").get<std::string>();
  if (cfg.output_directory.empty()) fail("output.directory", "must be non-empty");

  return cfg;
}

}  // namespace

std::vector<const Cost*> ExperimentConfig::cost_pointers() const {
  std::vector<const Cost*> out;
  out.reserve(costs.size());
  for (const auto& c : costs) out.push_back(c.get());
  return out;
}

NoiseParams ExperimentConfig::resolve_noise() const {
  if (noise_override) return *noise_override;
  NoiseParams merged;
  RandomStream rng = RandomStream::derive(run.base_seed, 0x6e6f697365ULL);
  for (std::size_t k = 0; k < costs.size(); ++k) {
    const NoiseParams fit = fit_noise_params(*costs[k], 20000, 1.0, rng);
    merged.alpha = std::max(merged.alpha, fit.alpha);
    merged.sigma_v_sq = std::max(merged.sigma_v_sq, fit.sigma_v_sq);
    merged.alpha4 = std::max(merged.alpha4, fit.alpha4);
    merged.sigma_v4_sq = std::max(merged.sigma_v4_sq, fit.sigma_v4_sq);
  }
  return merged;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  return parse_json(root);
}

}  // namespace asyncnet
