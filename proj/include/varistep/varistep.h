#ifndef VARISTEP_VARISTEP_H
#define VARISTEP_VARISTEP_H

/*
 * C interface to the varistep integrator library.
 *
 * Objects are opaque handles released with their *_destroy function.
 * Every function returns a vstep_status; on failure the calling thread's
 * vstep_last_error() describes what went wrong until the next call.
 * Phase vectors are packed as (p_1..p_n, q_1..q_n).
 */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(VSTEP_BUILDING_LIBRARY)
#    define VSTEP_API __declspec(dllexport)
#  else
#    define VSTEP_API __declspec(dllimport)
#  endif
#else
#  define VSTEP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vstep_status {
  VSTEP_OK = 0,
  VSTEP_ERR_INVALID_GRID,
  VSTEP_ERR_INVALID_RANGE,
  VSTEP_ERR_INVALID_INPUT,
  VSTEP_ERR_CONFIG,
  VSTEP_ERR_CAPABILITY,
  VSTEP_ERR_PARSE,
  VSTEP_ERR_NAME,
  VSTEP_ERR_EVAL,
  VSTEP_ERR_NO_CONVERGENCE,
  VSTEP_ERR_SINGULAR_SYSTEM,
  VSTEP_ERR_NONPOSITIVE_STEP,
  VSTEP_ERR_STEP_REJECTED,
  VSTEP_ERR_SINGULAR_DOMAIN,
  VSTEP_ERR_IO,
  VSTEP_ERR_NULL_ARGUMENT,
  VSTEP_ERR_INTERNAL
} vstep_status;

typedef struct vstep_model vstep_model;
typedef struct vstep_trajectory vstep_trajectory;
typedef struct vstep_report vstep_report;

typedef enum vstep_check {
  VSTEP_CHECK_SYMPLECTIC = 0,
  VSTEP_CHECK_COHOMOLOGY,
  VSTEP_CHECK_SITE_DENSITY,
  VSTEP_CHECK_EL_RESIDUAL,
  VSTEP_CHECK_LEGENDRE
} vstep_check;

typedef enum vstep_scheme {
  VSTEP_SCHEME_VARIABLE_STEP_MIDPOINT = 0,
  VSTEP_SCHEME_FIXED_STEP_MIDPOINT,
  VSTEP_SCHEME_ALPHA_BETA
} vstep_scheme;

/* Step flags reported by vstep_trajectory_step. */
#define VSTEP_FLAG_BOOTSTRAP 1u
#define VSTEP_FLAG_DEGENERATE 2u
#define VSTEP_FLAG_RETRIED 4u
#define VSTEP_FLAG_FIXED 8u

VSTEP_API const char* vstep_version(void);
VSTEP_API const char* vstep_status_name(vstep_status status);
/* Message of the last failed call on this thread; "" after a success. */
VSTEP_API const char* vstep_last_error(void);

/* Models. `params_json` is a JSON object of numeric parameters or NULL. */
VSTEP_API vstep_status vstep_model_create_builtin(const char* name, const char* params_json,
                                                  vstep_model** out);
VSTEP_API vstep_status vstep_model_create_expression(const char* source, int dimension,
                                                     vstep_model** out);
VSTEP_API void vstep_model_destroy(vstep_model* model);
VSTEP_API int vstep_model_dimension(const vstep_model* model);
/* H and its gradients at (q, p, t); any output pointer may be NULL. */
VSTEP_API vstep_status vstep_model_evaluate(const vstep_model* model, const double* q,
                                            const double* p, double t, double* value,
                                            double* grad_p, double* grad_q, double* dt);

/* Integration. `tau` is tau1 for the variable-step scheme and the fixed
 * step otherwise. Exactly one of t_end (> t0) and max_steps (> 0) must be
 * active; pass t_end <= t0 or max_steps = 0 to disable the other. On an
 * integration failure the partial trajectory is still returned in *out
 * together with the failure status. */
VSTEP_API vstep_status vstep_integrate(const vstep_model* model, vstep_scheme scheme,
                                       double alpha, double beta, const double* q0,
                                       const double* p0, double t0, double tau, double t_end,
                                       size_t max_steps, vstep_trajectory** out);
VSTEP_API void vstep_trajectory_destroy(vstep_trajectory* trajectory);
VSTEP_API size_t vstep_trajectory_size(const vstep_trajectory* trajectory);
VSTEP_API vstep_status vstep_trajectory_node(const vstep_trajectory* trajectory, size_t k,
                                             double* t, double* q, double* p);
/* Interval k, 0 <= k < size - 1. energy_residual is NaN for k = 0. */
VSTEP_API vstep_status vstep_trajectory_step(const vstep_trajectory* trajectory, size_t k,
                                             double* tau, double* e_mid,
                                             double* energy_residual, int* newton_iterations,
                                             unsigned* flags);
VSTEP_API vstep_status vstep_trajectory_write_csv(const vstep_trajectory* trajectory,
                                                  const char* path);

/* Config-driven runs. `csv_path`/`out_path` may be NULL. The JSON report
 * is returned in *report whenever the config was valid, including after an
 * integration failure. */
VSTEP_API vstep_status vstep_run_integrate(const char* config_json, const char* csv_path,
                                           vstep_report** report);
VSTEP_API vstep_status vstep_run_check(const char* config_json, vstep_check which,
                                       const char* out_path, vstep_report** report);
VSTEP_API const char* vstep_report_json(const vstep_report* report);
/* Whether every asserted invariant of a check held. */
VSTEP_API int vstep_report_passed(const vstep_report* report);
VSTEP_API void vstep_report_destroy(vstep_report* report);

/* Presets: names joined by '\n', and the JSON config of one preset. The
 * returned strings stay valid for the lifetime of the library. */
VSTEP_API const char* vstep_list_presets(void);
VSTEP_API vstep_status vstep_preset_config(const char* name, const char** config_json);

#ifdef __cplusplus
}
#endif

#endif /* VARISTEP_VARISTEP_H */
