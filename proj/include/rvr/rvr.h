/* C interface of the rvr library. All objects are opaque handles; every
 * function returns an rvr_status and writes results through out-pointers.
 * The message of the most recent failure on the calling thread is available
 * from rvr_last_error_message(). */
#ifndef RVR_RVR_H
#define RVR_RVR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RVR_API __declspec(dllexport)
#else
#define RVR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rvr_status {
  RVR_OK = 0,
  RVR_ERR_STRUCTURAL = 1, /* shape, index or wiring error */
  RVR_ERR_DOMAIN = 2,     /* mathematically undefined request */
  RVR_ERR_CONFIG = 3,     /* invalid parameter or config key */
  RVR_ERR_IO = 4,
  RVR_ERR_REFUSED = 5,    /* enumeration too large */
  RVR_ERR_INTERNAL = 6,
  RVR_ERR_VERIFY_FAILED = 7
} rvr_status;

typedef struct rvr_problem rvr_problem;
typedef struct rvr_trace rvr_trace;

RVR_API const char* rvr_version(void);
RVR_API const char* rvr_status_name(rvr_status status);
/* Thread-local; valid until the next failing call on this thread. */
RVR_API const char* rvr_last_error_message(void);

/* ---------------------------------------------------------------- problems */

/* Random mu-strongly convex quadratic on R^d with n components. */
RVR_API rvr_status rvr_problem_quadratic(size_t n, int d, double mu, double L,
                                         uint64_t seed, rvr_problem** out);
/* Rayleigh problem on the unit sphere in R^d from n standard Gaussian samples. */
RVR_API rvr_status rvr_problem_rayleigh_gaussian(size_t n, int d, uint64_t seed,
                                                 rvr_problem** out);
/* Rayleigh problem from a column-major d x n sample matrix. */
RVR_API rvr_status rvr_problem_rayleigh(const double* samples, int d, size_t n,
                                        rvr_problem** out);
RVR_API rvr_status rvr_problem_rayleigh_csv(const char* path, rvr_problem** out);
RVR_API void rvr_problem_free(rvr_problem* problem);

typedef struct rvr_problem_info {
  size_t n; /* 0 for online problems */
  int d;
  int on_sphere;
  double L;
  double mu;
  int has_f_star;
  double f_star;
} rvr_problem_info;

RVR_API rvr_status rvr_problem_get_info(const rvr_problem* problem,
                                        rvr_problem_info* out);
/* x has d entries and must lie on the problem's manifold. */
RVR_API rvr_status rvr_problem_value(const rvr_problem* problem, const double* x,
                                     double* out);
/* Riemannian gradient of f at x, written to grad[0..d). */
RVR_API rvr_status rvr_problem_gradient(const rvr_problem* problem,
                                        const double* x, double* grad);
/* Uniformly random point from `seed`, written to x[0..d). */
RVR_API rvr_status rvr_problem_random_point(const rvr_problem* problem,
                                            uint64_t seed, double* x);

/* -------------------------------------------------------------- algorithms */

typedef struct rvr_run_options {
  const char* method; /* rgd, rsgd, rsvrg, rlsvrg, rpage */
  double eta;
  double p;
  size_t B;
  size_t b;
  uint64_t K;
  uint64_t seed;
  size_t inner_loop_m; /* 0 means n */
  uint64_t trace_stride;
  double zeta;
} rvr_run_options;

/* Fills defaults: p = 1, B = b = 1, trace_stride = 1, zeta = 1, rest zero. */
RVR_API void rvr_run_options_init(rvr_run_options* options);

/* Runs one algorithm from x0 (d entries). */
RVR_API rvr_status rvr_run(const rvr_problem* problem, const double* x0,
                           const rvr_run_options* options, rvr_trace** out);
RVR_API void rvr_trace_free(rvr_trace* trace);

typedef struct rvr_trace_row {
  uint64_t step;
  uint64_t grad_evals;
  int has_comm_coords;
  uint64_t comm_coords;
  double f_value;
  double grad_norm_sq;
  int has_dist_to_opt;
  double dist_to_opt;
  int has_lyapunov;
  double lyapunov;
} rvr_trace_row;

RVR_API rvr_status rvr_trace_size(const rvr_trace* trace, size_t* out);
RVR_API rvr_status rvr_trace_row_at(const rvr_trace* trace, size_t index,
                                    rvr_trace_row* out);
RVR_API rvr_status rvr_trace_total_grad_evals(const rvr_trace* trace, uint64_t* out);
RVR_API rvr_status rvr_trace_write_csv(const rvr_trace* trace, const char* path);

/* ----------------------------------------------------------------- harness */

/* Overrides; pass NULL fields / has_* = 0 to keep the config's values. */
typedef struct rvr_overrides {
  int has_seed;
  uint64_t seed;
  const char* out;
  int has_stride;
  uint64_t stride;
} rvr_overrides;

/* Runs a config file. `n_traces` receives the number of trace files written. */
RVR_API rvr_status rvr_experiment_run(const char* config_path,
                                      const rvr_overrides* overrides,
                                      size_t* n_traces);

/* Runs a verification suite. The JSON report is returned in a buffer owned by
 * the library (free with rvr_string_free). RVR_ERR_VERIFY_FAILED when any
 * check fails; the report is still produced. */
RVR_API rvr_status rvr_verify(const char* suite, char** report_json);

/* Runs a bench preset writing into `out_dir`; returns a JSON report. */
RVR_API rvr_status rvr_bench(const char* preset, const char* out_dir,
                             const rvr_overrides* overrides, char** report_json);

RVR_API void rvr_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* RVR_RVR_H */
