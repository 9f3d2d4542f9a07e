#include "asyncnet.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "asyncnet/config.hpp"
#include "asyncnet/csv.hpp"
#include "asyncnet/engine.hpp"
#include "asyncnet/stability.hpp"
#include "asyncnet/summary.hpp"
#include "asyncnet/verify.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

template <typename Fn>
asyncnet_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const asyncnet::ConfigError& e) {
    set_error(e.what());
    return ASYNCNET_ERROR_CONFIG;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return ASYNCNET_ERROR_ARGUMENT;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return ASYNCNET_ERROR_STATE;
  } catch (const std::ios_base::failure& e) {
    set_error(e.what());
    return ASYNCNET_ERROR_IO;
  } catch (const std::runtime_error& e) {
    set_error(e.what());
    return ASYNCNET_ERROR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return ASYNCNET_ERROR_INTERNAL;
  }
}

asyncnet_status require_handle(const void* handle) {
  if (handle == nullptr) {
    set_error("null handle");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return ASYNCNET_OK;
}

void ensure_directory(const std::string& directory) {
  std::filesystem::create_directories(directory);
}

}  // namespace

struct asyncnet_config {
  asyncnet::ExperimentConfig config;
};

struct asyncnet_report {
  asyncnet::StabilityReport report;
};

struct asyncnet_record {
  asyncnet::ExperimentRecord record;
  asyncnet::StabilityReport stability;
  asyncnet::SimulationSummary summary;
};

struct asyncnet_checks {
  std::vector<asyncnet::CheckOutcome> outcomes;
};

extern "C" {

const char* asyncnet_version(void) { return "0.1.0"; }

const char* asyncnet_status_name(asyncnet_status status) {
  switch (status) {
    case ASYNCNET_OK: return "ok";
    case ASYNCNET_ERROR_IO: return "io-error";
    case ASYNCNET_ERROR_CONFIG: return "config-error";
    case ASYNCNET_ERROR_ARGUMENT: return "argument-error";
    case ASYNCNET_ERROR_STATE: return "state-error";
    case ASYNCNET_ERROR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* asyncnet_last_error(void) { return g_last_error.c_str(); }

asyncnet_status asyncnet_config_open(const char* path, asyncnet_config** out) {
  if (path == nullptr || out == nullptr) {
    set_error("null argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    auto* handle = new asyncnet_config{asyncnet::parse_config(path)};
    *out = handle;
    return ASYNCNET_OK;
  });
}

asyncnet_status asyncnet_config_parse(const char* json_text,
                                      asyncnet_config** out) {
  if (json_text == nullptr || out == nullptr) {
    set_error("null argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    auto* handle = new asyncnet_config{asyncnet::parse_config_text(json_text)};
    *out = handle;
    return ASYNCNET_OK;
  });
}

void asyncnet_config_close(asyncnet_config* config) { delete config; }

asyncnet_status asyncnet_config_set_seed(asyncnet_config* config,
                                         uint64_t seed) {
  if (auto rc = require_handle(config)) return rc;
  config->config.run.base_seed = seed;
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_config_set_trials(asyncnet_config* config,
                                           size_t trials) {
  if (auto rc = require_handle(config)) return rc;
  if (trials < 1) {
    set_error("trials must be >= 1");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  config->config.run.trials = trials;
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_config_set_horizon(asyncnet_config* config,
                                            size_t horizon) {
  if (auto rc = require_handle(config)) return rc;
  config->config.run.horizon = horizon;
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_config_set_output(asyncnet_config* config,
                                           const char* directory) {
  if (auto rc = require_handle(config)) return rc;
  if (directory == nullptr || directory[0] == '\0') {
    set_error("output directory must be non-empty");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  config->config.output_directory = directory;
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_config_output(const asyncnet_config* config,
                                       const char** out) {
  if (auto rc = require_handle(config)) return rc;
  if (out == nullptr) {
    set_error("null output argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  *out = config->config.output_directory.c_str();
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_stability(const asyncnet_config* config,
                                   asyncnet_report** out) {
  if (auto rc = require_handle(config)) return rc;
  if (out == nullptr) {
    set_error("null output argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const auto& cfg = config->config;
    const auto costs = cfg.cost_pointers();
    const asyncnet::NoiseParams noise = cfg.resolve_noise();
    const asyncnet::MomentSet moments =
        asyncnet::analytic_moments(*cfg.graph, cfg.steps, *cfg.combination);
    auto* handle = new asyncnet_report{
        asyncnet::build_report(costs, noise, moments, cfg.steps)};
    *out = handle;
    return ASYNCNET_OK;
  });
}

void asyncnet_report_close(asyncnet_report* report) { delete report; }

asyncnet_status asyncnet_report_value(const asyncnet_report* report,
                                      const char* key, double* out) {
  if (auto rc = require_handle(report)) return rc;
  if (key == nullptr || out == nullptr) {
    set_error("null argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const auto& r = report->report;
    const std::string k = key;
    if (k == "beta") *out = r.beta;
    else if (k == "theta") *out = r.theta;
    else if (k == "kappa") *out = r.kappa;
    else if (k == "nu_o") *out = r.nu_o;
    else if (k == "nu") *out = r.nu;
    else if (k == "b") *out = r.b;
    else if (k == "b4") *out = r.b4;
    else if (k == "alpha") *out = r.alpha;
    else if (k == "sigma_v_sq") *out = r.sigma_v_sq;
    else if (k == "b_nu_o") *out = r.b_nu_o();
    else if (k == "envelope_limit") *out = r.envelope_limit();
    else if (k == "fourth_bound") *out = asyncnet::fourth_bound(r);
    else {
      set_error("unknown report key: " + k);
      return ASYNCNET_ERROR_ARGUMENT;
    }
    return ASYNCNET_OK;
  });
}

asyncnet_status asyncnet_report_condition(const asyncnet_report* report,
                                          const char* condition, int* out) {
  if (auto rc = require_handle(report)) return rc;
  if (condition == nullptr || out == nullptr) {
    set_error("null argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  const auto& r = report->report;
  const std::string c = condition;
  asyncnet::Verdict v;
  if (c == "ms") v = r.ms_condition;
  else if (c == "ms_sufficient") v = r.ms_sufficient;
  else if (c == "fourth") v = r.fourth_condition;
  else if (c == "model_bound") v = r.model_specific_bound;
  else {
    set_error("unknown condition: " + c);
    return ASYNCNET_ERROR_ARGUMENT;
  }
  *out = v == asyncnet::Verdict::Pass ? 1 : 0;
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_report_write(const asyncnet_report* report,
                                      const char* directory) {
  if (auto rc = require_handle(report)) return rc;
  if (directory == nullptr) {
    set_error("null directory");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const std::string dir = directory;
    ensure_directory(dir);
    asyncnet::write_report_txt(report->report, dir + "/report.txt");
    asyncnet::write_report_csv(report->report, dir + "/report.csv");
    return ASYNCNET_OK;
  });
}

asyncnet_status asyncnet_simulate(const asyncnet_config* config,
                                  asyncnet_record** out) {
  if (auto rc = require_handle(config)) return rc;
  if (out == nullptr) {
    set_error("null output argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const auto& cfg = config->config;
    const auto costs = cfg.cost_pointers();
    const asyncnet::NoiseParams noise = cfg.resolve_noise();
    const asyncnet::MomentSet moments =
        asyncnet::analytic_moments(*cfg.graph, cfg.steps, *cfg.combination);
    const asyncnet::StabilityReport stability =
        asyncnet::build_report(costs, noise, moments, cfg.steps);

    asyncnet::ExperimentSetup setup;
    setup.graph = cfg.graph.get();
    setup.combination = cfg.combination.get();
    setup.steps = &cfg.steps;
    setup.costs = &costs;
    setup.init_w = cfg.init_w;
    setup.exclude_divergent =
        stability.ms_condition != asyncnet::Verdict::Pass;

    asyncnet::ExperimentRecord record = asyncnet::run_experiment(
        setup, cfg.run.trials, cfg.run.horizon, cfg.run.base_seed);
    asyncnet::SimulationSummary summary =
        asyncnet::summarize_experiment(cfg, stability, record);
    auto* handle = new asyncnet_record{std::move(record), stability,
                                       std::move(summary)};
    *out = handle;
    return ASYNCNET_OK;
  });
}

void asyncnet_record_close(asyncnet_record* record) { delete record; }

asyncnet_status asyncnet_record_value(const asyncnet_record* record,
                                      const char* key, double* out) {
  if (auto rc = require_handle(record)) return rc;
  if (key == nullptr || out == nullptr) {
    set_error("null argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const auto& s = record->summary;
    const std::string k = key;
    if (k == "steady_msd_max") *out = s.msd_max.value;
    else if (k == "steady_msd_max_se") *out = s.msd_max.se;
    else if (k == "steady_disagreement") *out = s.disagreement.value;
    else if (k == "steady_disagreement_se") *out = s.disagreement.se;
    else if (k == "steady_m4_max") *out = s.m4_max.value;
    else if (k == "steady_m4_max_se") *out = s.m4_max.se;
    else if (k == "b_nu_o") *out = s.envelope.b_nu_o;
    else if (k == "envelope_limit") *out = s.envelope.limit;
    else if (k == "fourth_bound") *out = asyncnet::fourth_bound(record->stability);
    else if (k == "n_diverged") *out = static_cast<double>(record->record.n_diverged);
    else if (k == "rows") *out = static_cast<double>(record->record.rows());
    else if (k == "agents") *out = static_cast<double>(record->record.agents);
    else if (k == "trials") *out = static_cast<double>(record->record.n_trials);
    else {
      set_error("unknown record key: " + k);
      return ASYNCNET_ERROR_ARGUMENT;
    }
    return ASYNCNET_OK;
  });
}

asyncnet_status asyncnet_record_bounds_pass(const asyncnet_record* record,
                                            int* out) {
  if (auto rc = require_handle(record)) return rc;
  if (out == nullptr) {
    set_error("null output argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  *out = record->summary.all_applicable_pass() ? 1 : 0;
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_record_write(const asyncnet_record* record,
                                      const char* directory) {
  if (auto rc = require_handle(record)) return rc;
  if (directory == nullptr) {
    set_error("null directory");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const std::string dir = directory;
    ensure_directory(dir);
    asyncnet::write_timeseries_csv(record->record, dir + "/timeseries.csv");
    asyncnet::write_summary_csv(record->summary, record->stability,
                                dir + "/summary.csv");
    return ASYNCNET_OK;
  });
}

asyncnet_status asyncnet_moments(const asyncnet_config* config,
                                 const char* directory, size_t* out_failures) {
  if (auto rc = require_handle(config)) return rc;
  if (directory == nullptr) {
    set_error("null directory");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const auto& cfg = config->config;
    const std::string dir = directory;
    ensure_directory(dir);
    cfg.graph->write_edge_list_csv(dir + "/edges.csv");

    const asyncnet::MomentSet analytic =
        asyncnet::analytic_moments(*cfg.graph, cfg.steps, *cfg.combination);
    asyncnet::RandomStream rng =
        asyncnet::RandomStream::derive(cfg.run.base_seed, 0x63617069ULL);
    const asyncnet::MomentSet empirical = asyncnet::empirical_moments(
        *cfg.graph, cfg.steps, *cfg.combination, 100000, rng);

    std::size_t failures = 0;
    asyncnet::CsvWriter csv(dir + "/moments.csv",
                            {"entry", "analytic", "empirical", "se", "within_3se"});
    auto row = [&](const std::string& entry, double a, double e, double se) {
      const bool ok = std::abs(a - e) <= 3.0 * se + 1e-12;
      if (!ok) ++failures;
      csv.begin_row();
      csv.add(entry);
      csv.add(a);
      csv.add(e);
      csv.add(se);
      csv.add(std::string(ok ? "1" : "0"));
      csv.end_row();
    };
    const int n = cfg.agents;
    for (int k = 0; k < n; ++k) {
      row("mu_bar[" + std::to_string(k) + "]", analytic.mu_bar(k),
          empirical.mu_bar(k), empirical.mu_bar_se(k));
      row("mu_m2[" + std::to_string(k) + "]", analytic.mu_m2(k),
          empirical.mu_m2(k), empirical.mu_m2_se(k));
      row("mu_m4[" + std::to_string(k) + "]", analytic.mu_m4(k),
          empirical.mu_m4(k), empirical.mu_m4_se(k));
    }
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k)
        row("abar(" + std::to_string(l) + "," + std::to_string(k) + ")",
            analytic.abar(l, k), empirical.abar(l, k), empirical.abar_se(l, k));
    for (int r = 0; r < n * n; ++r)
      for (int c = 0; c < n * n; ++c) {
        row("c_m(" + std::to_string(r) + "," + std::to_string(c) + ")",
            analytic.c_m(r, c), empirical.c_m(r, c), empirical.c_m_se(r, c));
        row("c_a(" + std::to_string(r) + "," + std::to_string(c) + ")",
            analytic.c_a(r, c), empirical.c_a(r, c), empirical.c_a_se(r, c));
      }
    if (out_failures != nullptr) *out_failures = failures;
    return ASYNCNET_OK;
  });
}

asyncnet_status asyncnet_verify(const asyncnet_config* config,
                                const char* suite, asyncnet_checks** out) {
  if (auto rc = require_handle(config)) return rc;
  if (suite == nullptr || out == nullptr) {
    set_error("null argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    auto* handle =
        new asyncnet_checks{asyncnet::run_verify(config->config, suite)};
    *out = handle;
    return ASYNCNET_OK;
  });
}

void asyncnet_checks_close(asyncnet_checks* checks) { delete checks; }

size_t asyncnet_checks_count(const asyncnet_checks* checks) {
  return checks == nullptr ? 0 : checks->outcomes.size();
}

size_t asyncnet_checks_failures(const asyncnet_checks* checks) {
  return checks == nullptr ? 0 : asyncnet::count_failures(checks->outcomes);
}

asyncnet_status asyncnet_checks_get(const asyncnet_checks* checks,
                                    size_t index, asyncnet_check_info* out) {
  if (auto rc = require_handle(checks)) return rc;
  if (out == nullptr) {
    set_error("null output argument");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  if (index >= checks->outcomes.size()) {
    set_error("check index out of range");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  const asyncnet::CheckOutcome& o = checks->outcomes[index];
  out->suite = o.suite.c_str();
  out->name = o.name.c_str();
  out->detail = o.detail.c_str();
  out->pass = o.pass ? 1 : 0;
  out->skipped = o.skipped ? 1 : 0;
  out->measured = o.measured;
  out->tolerance = o.tolerance;
  return ASYNCNET_OK;
}

asyncnet_status asyncnet_checks_write(const asyncnet_checks* checks,
                                      const char* path) {
  if (auto rc = require_handle(checks)) return rc;
  if (path == nullptr) {
    set_error("null path");
    return ASYNCNET_ERROR_ARGUMENT;
  }
  return guarded([&] {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    asyncnet::write_verify_csv(checks->outcomes, path);
    return ASYNCNET_OK;
  });
}

}  // extern "C"
