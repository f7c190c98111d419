/* C interface to the warpfit library: Wasserstein variation of one-dimensional
 * samples, parametric deformation alignment, and bootstrap deformation tests.
 *
 * All functions return wf_status; results travel through out-parameters.
 * Handles returned by wf_family_create must be released with wf_family_free.
 */
#ifndef WARPFIT_WARPFIT_H
#define WARPFIT_WARPFIT_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wf_status {
  WF_OK = 0,
  WF_EMPTY_SAMPLE,
  WF_NON_FINITE_VALUE,
  WF_OUT_OF_RANGE,
  WF_INVALID_ORDER,
  WF_EMPTY_COLLECTION,
  WF_INSTANCE_TOO_LARGE,
  WF_PARAM_OUT_OF_BOX,
  WF_DEGENERATE_DENOMINATOR,
  WF_NO_CONVERGENCE,
  WF_SINGULAR_SIGMA,
  WF_QUADRATURE_DIVERGENCE,
  WF_INVALID_SPEC,
  WF_EMPTY_STATS,
  WF_BAD_ARGUMENT,
  WF_INTERNAL_ERROR
} wf_status;

const char* wf_status_name(wf_status status);

/* Message of the most recent failure on the calling thread. */
const char* wf_last_error(void);

/* ---- Deformation families (opaque) ---- */

typedef struct wf_family wf_family;

/* id: "location-scale" (p=2), "scale" (p=1), "location" (p=1), "identity". */
wf_family* wf_family_create(const char* id);
/* Same, with an explicit parameter box of dimension p. */
wf_family* wf_family_create_boxed(const char* id, const double* lo, const double* hi, int p);
void wf_family_free(wf_family* family);
int wf_family_param_dim(const wf_family* family);
wf_status wf_family_identity(const wf_family* family, double* out);

/* ---- Distances and variation ----
 * Samples are passed as a concatenated value array plus per-sample lengths.
 */

wf_status wf_wasserstein(const double* a, int64_t na, const double* b, int64_t nb, double r,
                         double* out);

/* V_r of J samples; when out_per_sample is non-null it receives the J
 * W_r distances to the optimal center. */
wf_status wf_variation(const double* values, const int64_t* sizes, int J, double r,
                       double* out_variation, double* out_per_sample);

/* Exact small-instance coupling optimum, returns V_r^r. */
wf_status wf_variation_oracle(const double* values, const int64_t* sizes, int J, double r,
                              double* out);

wf_status wf_scale_closed_form(const double* a, int64_t na, const double* b, int64_t nb,
                               double* out);

/* ---- Alignment ---- */

typedef struct wf_opt_config {
  int restarts;
  double fn_tol;
  double x_tol;
  int64_t max_evals; /* 0 -> default budget */
  uint64_t seed;
  int threads;
} wf_opt_config;

wf_opt_config wf_opt_config_default(void);

typedef struct wf_align_result {
  double cost;
  int64_t evaluations;
  int converged;
  int restarts_used;
} wf_align_result;

/* theta_out receives J*p values, blocks in sample order. ref_value may be
 * null for the family identity. */
wf_status wf_align(const double* values, const int64_t* sizes, int J, const wf_family* family,
                   int ref_index, const double* ref_value, const wf_opt_config* config,
                   double* theta_out, wf_align_result* out);

/* ---- Bootstrap tests ---- */

typedef struct wf_boot_config {
  int64_t B;
  double m_exponent;  /* <= 0 -> per-test default (0.9 gof, 0.5 threshold) */
  int64_t m_explicit; /* > 0 overrides the exponent */
  uint64_t seed;
  double alpha;
  int threads;
  /* -1: per-test default (gof draws every bootstrap sample from the first
   * sample so the null holds exactly in the bootstrap world; threshold
   * resamples each sample from itself). 0 forces per-sample, 1 from-first. */
  int resampling;
  wf_opt_config opt;
} wf_boot_config;

wf_boot_config wf_boot_config_default(void);

typedef struct wf_test_report {
  double statistic;
  double critical_value;
  double p_value;
  int reject;
  int64_t n;
  int64_t m_n;
  int64_t B;
  uint64_t seed;
  int kind; /* 0 = gof, 1 = threshold */
  double alpha;
  int64_t nonconverged;
} wf_test_report;

wf_status wf_gof_test(const double* values, const int64_t* sizes, int J,
                      const wf_family* family, int ref_index, const wf_boot_config* config,
                      wf_test_report* out);

wf_status wf_threshold_test(const double* values, const int64_t* sizes, int J,
                            const wf_family* family, int ref_index, double delta0,
                            const wf_boot_config* config, wf_test_report* out);

/* ---- Monte Carlo experiments ----
 * grid_* are parallel arrays of length rows. gamma is null for the null
 * scenario or one of "exp", "laplace", "t3", "t4", "normal:mu,sd".
 * out_freq receives `rows` rejection frequencies. When out_csv_path is
 * non-null the full table is also written there, bit-exact.
 */
wf_status wf_simulate(const int* grid_J, const int64_t* grid_n, const double* grid_beta,
                      int rows, const char* gamma, int64_t K, int64_t B, double alpha,
                      uint64_t seed, int threads, double* out_freq,
                      const char* out_csv_path);

/* ---- Limit-law sampling ----
 * Draws from the limiting distribution of the scaled alignment cost for the
 * J-sample deformation model with error law err_id ("uniform", "gaussian",
 * "exp", "laplace", "t<df>"). theta_star may be null for identity truth.
 * centered != 0 requests the centered variant required by heavy-tailed
 * error laws.
 */
wf_status wf_limit_sample(const wf_family* family, const double* theta_star, int J,
                          int ref_index, const char* err_id, int centered, int64_t grid_size,
                          int64_t count, uint64_t seed, double* out_draws);

#ifdef __cplusplus
}
#endif

#endif /* WARPFIT_WARPFIT_H */
