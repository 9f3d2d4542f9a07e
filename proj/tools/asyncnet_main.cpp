// Command-line front end for the asyncnet shared library. Talks to the
// library exclusively through the C interface in asyncnet.h.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>

#include "asyncnet.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConditionFailed = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t trials = 0;
  bool trials_set = false;
  std::size_t horizon = 0;
  bool horizon_set = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "base seed override")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--trials", opts.trials, "trial count override")
      ->each([&](const std::string&) { opts.trials_set = true; });
  cmd->add_option("--horizon", opts.horizon, "iteration count override")
      ->each([&](const std::string&) { opts.horizon_set = true; });
}

int fail_with(asyncnet_status status) {
  std::fprintf(stderr, "error (%s): %s\n", asyncnet_status_name(status),
               asyncnet_last_error());
  return status == ASYNCNET_ERROR_STATE ? kExitConditionFailed : kExitUsage;
}

// Applies overrides and resolves the output directory. Returns nullptr and
// sets *exit_code on failure.
asyncnet_config* load_config(const CommonOptions& opts, std::string* out_dir,
                             int* exit_code) {
  asyncnet_config* config = nullptr;
  asyncnet_status rc = asyncnet_config_open(opts.config_path.c_str(), &config);
  if (rc != ASYNCNET_OK) {
    *exit_code = fail_with(rc);
    return nullptr;
  }
  if (opts.seed_set) asyncnet_config_set_seed(config, opts.seed);
  if (opts.trials_set) {
    rc = asyncnet_config_set_trials(config, opts.trials);
    if (rc != ASYNCNET_OK) {
      *exit_code = fail_with(rc);
      asyncnet_config_close(config);
      return nullptr;
    }
  }
  if (opts.horizon_set) asyncnet_config_set_horizon(config, opts.horizon);
  if (!opts.out_dir.empty()) {
    rc = asyncnet_config_set_output(config, opts.out_dir.c_str());
    if (rc != ASYNCNET_OK) {
      *exit_code = fail_with(rc);
      asyncnet_config_close(config);
      return nullptr;
    }
  }
  const char* dir = nullptr;
  asyncnet_config_output(config, &dir);
  *out_dir = dir;
  return config;
}

int run_stability(const CommonOptions& opts) {
  std::string out_dir;
  int exit_code = kExitOk;
  asyncnet_config* config = load_config(opts, &out_dir, &exit_code);
  if (config == nullptr) return exit_code;

  asyncnet_report* report = nullptr;
  asyncnet_status rc = asyncnet_stability(config, &report);
  if (rc != ASYNCNET_OK) {
    asyncnet_config_close(config);
    return fail_with(rc);
  }
  rc = asyncnet_report_write(report, out_dir.c_str());
  if (rc != ASYNCNET_OK) {
    asyncnet_report_close(report);
    asyncnet_config_close(config);
    return fail_with(rc);
  }

  double beta = 0, nu_o = 0, b_nu_o = 0;
  asyncnet_report_value(report, "beta", &beta);
  asyncnet_report_value(report, "nu_o", &nu_o);
  asyncnet_report_value(report, "b_nu_o", &b_nu_o);
  int ms = 0, fourth = 0;
  asyncnet_report_condition(report, "ms", &ms);
  asyncnet_report_condition(report, "fourth", &fourth);
  std::printf("beta = %.6g,  nu_o = %.6g,  steady-state bound b*nu_o = %.6g\n",
              beta, nu_o, b_nu_o);
  std::printf("mean-square condition: %s,  fourth-order condition: %s\n",
              ms ? "pass" : "fail", fourth ? "pass" : "fail");
  std::printf("report written to %s\n", out_dir.c_str());

  asyncnet_report_close(report);
  asyncnet_config_close(config);
  return ms ? kExitOk : kExitConditionFailed;
}

int run_simulate(const CommonOptions& opts) {
  std::string out_dir;
  int exit_code = kExitOk;
  asyncnet_config* config = load_config(opts, &out_dir, &exit_code);
  if (config == nullptr) return exit_code;

  asyncnet_record* record = nullptr;
  asyncnet_status rc = asyncnet_simulate(config, &record);
  if (rc != ASYNCNET_OK) {
    asyncnet_config_close(config);
    return fail_with(rc);
  }
  rc = asyncnet_record_write(record, out_dir.c_str());
  if (rc != ASYNCNET_OK) {
    asyncnet_record_close(record);
    asyncnet_config_close(config);
    return fail_with(rc);
  }

  double msd = 0, msd_se = 0, b_nu_o = 0, limit = 0, diverged = 0;
  asyncnet_record_value(record, "steady_msd_max", &msd);
  asyncnet_record_value(record, "steady_msd_max_se", &msd_se);
  asyncnet_record_value(record, "b_nu_o", &b_nu_o);
  asyncnet_record_value(record, "envelope_limit", &limit);
  asyncnet_record_value(record, "n_diverged", &diverged);
  std::printf("steady-state msd_max = %.6g (se %.2g)\n", msd, msd_se);
  std::printf("bounds: b*nu_o = %.6g,  envelope limit = %.6g\n", b_nu_o, limit);
  if (diverged > 0)
    std::printf("flagged divergent trials: %.0f\n", diverged);

  int pass = 0;
  asyncnet_record_bounds_pass(record, &pass);
  std::printf("bound checks: %s\n", pass ? "pass" : "FAIL");
  std::printf("timeseries.csv and summary.csv written to %s\n", out_dir.c_str());

  asyncnet_record_close(record);
  asyncnet_config_close(config);
  return pass ? kExitOk : kExitConditionFailed;
}

int run_moments(const CommonOptions& opts) {
  std::string out_dir;
  int exit_code = kExitOk;
  asyncnet_config* config = load_config(opts, &out_dir, &exit_code);
  if (config == nullptr) return exit_code;

  size_t failures = 0;
  asyncnet_status rc = asyncnet_moments(config, out_dir.c_str(), &failures);
  asyncnet_config_close(config);
  if (rc != ASYNCNET_OK) return fail_with(rc);
  std::printf("moment comparison written to %s (%zu entries beyond 3 SE)\n",
              out_dir.c_str(), failures);
  return failures == 0 ? kExitOk : kExitConditionFailed;
}

int run_verify(const CommonOptions& opts, const std::string& suite) {
  std::string out_dir;
  int exit_code = kExitOk;
  asyncnet_config* config = load_config(opts, &out_dir, &exit_code);
  if (config == nullptr) return exit_code;

  asyncnet_checks* checks = nullptr;
  asyncnet_status rc = asyncnet_verify(config, suite.c_str(), &checks);
  if (rc != ASYNCNET_OK) {
    asyncnet_config_close(config);
    return fail_with(rc);
  }

  const size_t count = asyncnet_checks_count(checks);
  for (size_t i = 0; i < count; ++i) {
    asyncnet_check_info info;
    asyncnet_checks_get(checks, i, &info);
    const char* result = info.skipped ? "SKIP" : (info.pass ? "PASS" : "FAIL");
    std::printf("[%s] %s/%s  measured=%.6g tolerance=%.6g%s%s\n", result,
                info.suite, info.name, info.measured, info.tolerance,
                info.detail[0] ? "  " : "", info.detail);
  }
  const std::string csv_path = out_dir + "/verify_" + suite + ".csv";
  rc = asyncnet_checks_write(checks, csv_path.c_str());
  if (rc != ASYNCNET_OK) {
    asyncnet_checks_close(checks);
    asyncnet_config_close(config);
    return fail_with(rc);
  }
  const size_t failures = asyncnet_checks_failures(checks);
  std::printf("%zu checks, %zu failed; results in %s\n", count, failures,
              csv_path.c_str());

  asyncnet_checks_close(checks);
  asyncnet_config_close(config);
  return failures == 0 ? kExitOk : kExitConditionFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"asynchronous diffusion network simulator"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonOptions stability_opts, moments_opts, simulate_opts, verify_opts;
  std::string suite = "all";

  CLI::App* stability =
      app.add_subcommand("stability", "evaluate stability conditions and bounds");
  add_common(stability, stability_opts);
  CLI::App* moments =
      app.add_subcommand("moments", "compare analytic and Monte-Carlo moments");
  add_common(moments, moments_opts);
  CLI::App* simulate =
      app.add_subcommand("simulate", "run the Monte-Carlo experiment");
  add_common(simulate, simulate_opts);
  CLI::App* verify =
      app.add_subcommand("verify", "run a named invariant suite");
  add_common(verify, verify_opts);
  verify->add_option("suite", suite,
                     "moments|lemmas|recursion|bounds|scaling|fourth|all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (stability->parsed()) return run_stability(stability_opts);
  if (moments->parsed()) return run_moments(moments_opts);
  if (simulate->parsed()) return run_simulate(simulate_opts);
  if (verify->parsed()) return run_verify(verify_opts, suite);
  return kExitUsage;
}
