/* C API of the self-triggered cloud synchronization toolkit.
 *
 * The library designs certificates for cloud-mediated self-triggered
 * synchronization of LTI multi-agent systems and runs the deterministic
 * closed-loop simulation. All state lives behind opaque handles; every
 * entry point reports a status code and, on failure, a message through
 * the caller-provided buffer.
 */
#ifndef STSYNC_H
#define STSYNC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct stsync_scenario stsync_scenario;
typedef struct stsync_certificate stsync_certificate;
typedef struct stsync_run stsync_run;

typedef enum {
  STSYNC_OK = 0,
  STSYNC_ERROR_SYNTHESIS = 2,   /* offline design failed */
  STSYNC_ERROR_MONITOR = 3,     /* a runtime guarantee monitor fired */
  STSYNC_ERROR_IO = 4           /* parse / file-system / hash mismatch */
} stsync_status;

typedef struct {
  double horizon_override; /* <= 0 keeps the scenario horizon */
  double grid_step;        /* <= 0 keeps the scenario output step */
  int strict_monitors;     /* nonzero: abort at the first violated monitor */
} stsync_sim_options;

const char* stsync_status_message(stsync_status status);

/* ---- scenario ---- */
stsync_status stsync_scenario_load(const char* path, stsync_scenario** out,
                                   char* err, size_t err_len);
void stsync_scenario_free(stsync_scenario* scenario);

/* ---- offline design (Algorithm 1) ---- */
stsync_status stsync_design(const stsync_scenario* scenario,
                            stsync_certificate** out, char* err, size_t err_len);
stsync_status stsync_certificate_save(const stsync_certificate* cert,
                                      const char* path, char* err, size_t err_len);
stsync_status stsync_certificate_load(const char* path, stsync_certificate** out,
                                      char* err, size_t err_len);
stsync_status stsync_design_report_write(const stsync_certificate* cert,
                                         const char* path, char* err,
                                         size_t err_len);
/* Scalar certificate entries: "epsilon", "kappa", "lambda", "kappa_theta",
 * "theta", "eta0", "eta_bar", "b_prime_norm", "s0", "s_inf", "lambda_s",
 * "beta_<i>", "gamma_<i>", "tau_star_<i>". Returns NaN for unknown keys. */
double stsync_certificate_stat(const stsync_certificate* cert, const char* key);
void stsync_certificate_free(stsync_certificate* cert);

/* ---- closed-loop run (Algorithm 2) ---- */
stsync_status stsync_simulate(const stsync_scenario* scenario,
                              const stsync_certificate* cert,
                              const stsync_sim_options* options, stsync_run** out,
                              char* err, size_t err_len);
/* Writes trajectory.csv, events.csv and summary.txt into out_dir. */
stsync_status stsync_run_write_outputs(const stsync_run* run, const char* out_dir,
                                       char* err, size_t err_len);
/* 1 when every monitor passed (lemma bounds, repository consistency, non-Zeno). */
int stsync_run_monitors_ok(const stsync_run* run);
/* Scalar run statistics: "final_error", "epsilon", "settle_time",
 * "limsup_tail", "access_count_<i>", "min_interval_<i>", "avg_interval_<i>",
 * "lemma1_margin", "lemma2_margin", "repo_margin". NaN for unknown keys. */
double stsync_run_stat(const stsync_run* run, const char* key);
void stsync_run_free(stsync_run* run);

/* ---- plot-ready aggregates ---- */
stsync_status stsync_report(const char* trajectory_csv, const char* events_csv,
                            const char* summary_txt, const char* out_dir,
                            char* err, size_t err_len);

#ifdef __cplusplus
}
#endif

#endif /* STSYNC_H */
