#ifndef QFC_QFC_H
#define QFC_QFC_H

/* C interface of the qfc library. Every call returns a qfc_status; on
 * failure qfc_last_error() describes the problem (per thread, valid until
 * the next failing call on that thread). Handles are opaque and must be
 * released with the matching *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QFC_API __declspec(dllexport)
#else
#define QFC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qfc_status {
  QFC_OK = 0,
  QFC_ERR_INVALID_ARGUMENT = 1,
  QFC_ERR_NUMERICAL = 2,
  QFC_ERR_CONFIG = 3,
  QFC_ERR_IO = 4,
  QFC_ERR_INTERNAL = 5
} qfc_status;

QFC_API const char* qfc_version(void);
QFC_API const char* qfc_last_error(void);
/* For QFC_ERR_CONFIG: offending key ("" if none) and 1-based line (0 if none). */
QFC_API const char* qfc_last_error_key(void);
QFC_API int qfc_last_error_line(void);
QFC_API const char* qfc_status_name(qfc_status s);

/* ---- experiments ---- */

typedef struct qfc_config qfc_config;

/* experiment: fig1a | fig1b | eps_sweep | mub_audit | steady_curve */
QFC_API qfc_status qfc_config_load(const char* experiment, const char* path, qfc_config** out);
QFC_API qfc_status qfc_config_parse(const char* experiment, const char* text, qfc_config** out);
QFC_API qfc_status qfc_config_set_seed(qfc_config* cfg, uint64_t seed);
/* Output directory from the config's output_path key. Borrowed pointer. */
QFC_API const char* qfc_config_output_path(const qfc_config* cfg);
/* Writes the effective configuration as "key = value" lines into buf
 * (NUL-terminated, truncated to cap); *needed receives the full length. */
QFC_API qfc_status qfc_config_render(const qfc_config* cfg, char* buf, size_t cap, size_t* needed);
QFC_API void qfc_config_free(qfc_config* cfg);

typedef struct qfc_run_info {
  double wall_time_s;
  int n_files;
} qfc_run_info;

/* Runs the experiment and writes CSV files plus a manifest into out_dir
 * (created if missing). On failure no output files remain. info may be NULL. */
QFC_API qfc_status qfc_run_experiment(const qfc_config* cfg, const char* out_dir, qfc_run_info* info);

/* ---- states and entropy ---- */

typedef struct qfc_density qfc_density;

/* Row-major real and imaginary parts of a dim x dim density matrix. */
QFC_API qfc_status qfc_density_create(int dim, const double* re, const double* im, qfc_density** out);
QFC_API int qfc_density_dim(const qfc_density* rho);
/* Descending eigenvalues into values[0..dim-1]. */
QFC_API qfc_status qfc_density_eigenvalues(const qfc_density* rho, double* values);
QFC_API qfc_status qfc_density_entropies(const qfc_density* rho, double* von_neumann, double* linear,
                                         double* delta);
/* Exact mean linear-entropy rate under measurement of the observable with
 * row-major Hermitian matrix (re, im) at strength k. */
QFC_API qfc_status qfc_density_entropy_rate(const qfc_density* rho, const double* re, const double* im, double k,
                                            double* rate);
QFC_API void qfc_density_free(qfc_density* rho);

/* ---- steady state and closed form ---- */

QFC_API qfc_status qfc_steady_mean_success(double k, double beta, double eps, double* out);
QFC_API qfc_status qfc_steady_nofb_density(double k, double beta, double z, double* out);
QFC_API qfc_status qfc_unbiased_qubit_success(double k, double beta, double* out);
/* 1 - beta/(4kJ); *valid = 0 once beta/(4kJ) >= 1. */
QFC_API qfc_status qfc_rule_of_thumb(double k, double beta, double j_coupling, double* out, int* valid);

/* ---- closed loop ---- */

typedef enum qfc_feedback_mode { QFC_COMMUTING = 0, QFC_UNBIASED = 1 } qfc_feedback_mode;

typedef struct qfc_feedback {
  qfc_feedback_mode mode;
  double mu; /* <= 0 or infinity: ideal */
  double threshold_eps;
  int measurement_during_rotation;
} qfc_feedback;

typedef struct qfc_closed_loop_result {
  double mean_success;
  double stderr_success;
  double trigger_rate;
  long psd_violations;
} qfc_closed_loop_result;

QFC_API qfc_status qfc_closed_loop(const qfc_feedback* fb, double k, double beta, double dt, uint64_t seed,
                                   double t_final, int n_traj, qfc_closed_loop_result* out);

#ifdef __cplusplus
}
#endif

#endif
