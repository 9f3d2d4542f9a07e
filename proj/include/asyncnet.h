/*
 * C interface of the asyncnet shared library.
 *
 * All functions return an asyncnet_status; on failure a human-readable
 * message is available from asyncnet_last_error() until the next call on the
 * same thread. Objects are opaque handles released with the matching _close
 * function. Handles are immutable after creation except for the config
 * override setters, so they may be shared across threads for reading.
 */
#ifndef ASYNCNET_H
#define ASYNCNET_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum asyncnet_status {
  ASYNCNET_OK = 0,
  ASYNCNET_ERROR_IO = 1,        /* missing or unreadable files */
  ASYNCNET_ERROR_CONFIG = 2,    /* parse or validation failure */
  ASYNCNET_ERROR_ARGUMENT = 3,  /* bad handle, key, or parameter */
  ASYNCNET_ERROR_STATE = 4,     /* operation refused in this state */
  ASYNCNET_ERROR_INTERNAL = 5
} asyncnet_status;

typedef struct asyncnet_config asyncnet_config;
typedef struct asyncnet_report asyncnet_report;   /* stability report */
typedef struct asyncnet_record asyncnet_record;   /* experiment record */
typedef struct asyncnet_checks asyncnet_checks;   /* verify outcomes */

const char* asyncnet_version(void);
const char* asyncnet_status_name(asyncnet_status status);
const char* asyncnet_last_error(void);

/* ---- configuration ---- */

asyncnet_status asyncnet_config_open(const char* path, asyncnet_config** out);
asyncnet_status asyncnet_config_parse(const char* json_text,
                                      asyncnet_config** out);
void asyncnet_config_close(asyncnet_config* config);

asyncnet_status asyncnet_config_set_seed(asyncnet_config* config,
                                         uint64_t seed);
asyncnet_status asyncnet_config_set_trials(asyncnet_config* config,
                                           size_t trials);
asyncnet_status asyncnet_config_set_horizon(asyncnet_config* config,
                                            size_t horizon);
asyncnet_status asyncnet_config_set_output(asyncnet_config* config,
                                           const char* directory);
asyncnet_status asyncnet_config_output(const asyncnet_config* config,
                                       const char** out);

/* ---- stability analysis ---- */

asyncnet_status asyncnet_stability(const asyncnet_config* config,
                                   asyncnet_report** out);
void asyncnet_report_close(asyncnet_report* report);

/* Scalar lookup. Keys: beta, theta, kappa, nu_o, nu, b, b4, alpha,
 * sigma_v_sq, b_nu_o, envelope_limit, fourth_bound (this last one only when
 * the fourth-order condition holds). */
asyncnet_status asyncnet_report_value(const asyncnet_report* report,
                                      const char* key, double* out);
/* 1 = pass, 0 = fail or marginal. Conditions: ms, ms_sufficient, fourth,
 * model_bound. */
asyncnet_status asyncnet_report_condition(const asyncnet_report* report,
                                          const char* condition, int* out);
/* Writes report.txt (key = value lines) and report.csv (one row per agent)
 * into the directory, creating it if needed. */
asyncnet_status asyncnet_report_write(const asyncnet_report* report,
                                      const char* directory);

/* ---- simulation ---- */

/* Runs the Monte-Carlo experiment described by the config (including its
 * stability analysis, bound envelope, and steady-state summary). */
asyncnet_status asyncnet_simulate(const asyncnet_config* config,
                                  asyncnet_record** out);
void asyncnet_record_close(asyncnet_record* record);

/* Scalar lookup. Keys: steady_msd_max, steady_msd_max_se,
 * steady_disagreement, steady_disagreement_se, steady_m4_max,
 * steady_m4_max_se, b_nu_o, envelope_limit, fourth_bound, n_diverged,
 * rows, agents, trials. */
asyncnet_status asyncnet_record_value(const asyncnet_record* record,
                                      const char* key, double* out);
/* 1 when every applicable bound check passed. */
asyncnet_status asyncnet_record_bounds_pass(const asyncnet_record* record,
                                            int* out);
/* Writes timeseries.csv and summary.csv into the directory. */
asyncnet_status asyncnet_record_write(const asyncnet_record* record,
                                      const char* directory);

/* ---- moment model ---- */

/* Writes edges.csv (from,to,abar) plus moments.csv comparing the analytic
 * and Monte-Carlo moment sets; *out_failures counts entries beyond 3 SE. */
asyncnet_status asyncnet_moments(const asyncnet_config* config,
                                 const char* directory, size_t* out_failures);

/* ---- verification suites ---- */

/* suite is one of: moments, lemmas, recursion, bounds, scaling, fourth, all */
asyncnet_status asyncnet_verify(const asyncnet_config* config,
                                const char* suite, asyncnet_checks** out);
void asyncnet_checks_close(asyncnet_checks* checks);

typedef struct asyncnet_check_info {
  const char* suite;   /* owned by the checks handle */
  const char* name;
  const char* detail;
  int pass;            /* 1 pass, 0 fail */
  int skipped;         /* 1 when not applicable to this config */
  double measured;
  double tolerance;
} asyncnet_check_info;

size_t asyncnet_checks_count(const asyncnet_checks* checks);
size_t asyncnet_checks_failures(const asyncnet_checks* checks);
asyncnet_status asyncnet_checks_get(const asyncnet_checks* checks,
                                    size_t index, asyncnet_check_info* out);
asyncnet_status asyncnet_checks_write(const asyncnet_checks* checks,
                                      const char* path);

#ifdef __cplusplus
}
#endif

#endif /* ASYNCNET_H */
