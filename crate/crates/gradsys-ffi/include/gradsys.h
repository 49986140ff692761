#ifndef GRADSYS_H
#define GRADSYS_H

/* Generated by cbindgen from the gradsys-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Three-way boundary classification (plus the out-of-theory marker).
 */
typedef enum GradsysClass {
  GRADSYS_CLASS_ALL_BOUNDED = 0,
  GRADSYS_CLASS_U_BOUNDED_V_BLOWS_UP = 1,
  GRADSYS_CLASS_BOTH_BLOW_UP = 2,
  GRADSYS_CLASS_OUT_OF_THEORY = 3,
} GradsysClass;

/**
 * Where a phase flow settled.
 */
typedef enum GradsysLimit {
  GRADSYS_LIMIT_UNDECIDED = 0,
  GRADSYS_LIMIT_XI1 = 1,
  GRADSYS_LIMIT_XI2 = 2,
} GradsysLimit;

/**
 * How an integration ended.
 */
typedef enum GradsysOutcomeKind {
  GRADSYS_OUTCOME_KIND_GLOBAL_UP_TO = 0,
  GRADSYS_OUTCOME_KIND_BLOW_UP = 1,
  GRADSYS_OUTCOME_KIND_ABORTED = 2,
} GradsysOutcomeKind;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum GradsysStatus {
  GRADSYS_STATUS_OK = 0,
  /**
   * Parameter validation failed (dimension, signs, guard).
   */
  GRADSYS_STATUS_INVALID_PARAMS = 1,
  /**
   * The requested quantity needs p < 1 and ps + q < 1.
   */
  GRADSYS_STATUS_HYPOTHESIS_VIOLATED = 2,
  /**
   * A null out-pointer or handle was passed.
   */
  GRADSYS_STATUS_NULL_POINTER = 3,
  /**
   * Integration failed (step underflow, monotonicity loss).
   */
  GRADSYS_STATUS_INTEGRATION_FAILED = 4,
  /**
   * No finite-radius blow-up for these inputs.
   */
  GRADSYS_STATUS_NOT_A_BLOW_UP = 5,
  /**
   * The trajectory cannot support the requested fit window.
   */
  GRADSYS_STATUS_WINDOW_TOO_SHORT = 6,
  /**
   * Other invalid input (thresholds, grids, spans).
   */
  GRADSYS_STATUS_INVALID_INPUT = 7,
  /**
   * A panic was caught at the boundary.
   */
  GRADSYS_STATUS_PANIC = 8,
} GradsysStatus;

/**
 * Convergent / divergent / inconclusive.
 */
typedef enum GradsysVerdict {
  GRADSYS_VERDICT_CONVERGENT = 0,
  GRADSYS_VERDICT_DIVERGENT = 1,
  GRADSYS_VERDICT_INCONCLUSIVE = 2,
} GradsysVerdict;

/**
 * Opaque handle to a completed radial trajectory.
 */
typedef struct GradsysTrajectory GradsysTrajectory;

/**
 * System parameters (N, a, b, p, q, s).
 */
typedef struct GradsysParams {
  uint32_t n;
  double a;
  double b;
  double p;
  double q;
  double s;
} GradsysParams;

/**
 * Asymptotic exponents and log amplitudes.
 */
typedef struct GradsysProfile {
  double a_lim;
  double b_lim;
  double k_lim;
  double d_lim;
  double rho_u_reported;
  double ln_c_v;
  double ln_c_u_derived;
  double ln_c_u_reported;
} GradsysProfile;

/**
 * Linear stability data at the attracting equilibrium.
 */
typedef struct GradsysStability {
  double alpha;
  double beta;
  double gamma;
  double hurwitz_margin;
  double eigenvalues_re[3];
  double eigenvalues_im[3];
  bool asymptotically_stable;
} GradsysStability;

/**
 * Integrator controls; any field set to 0 selects the default
 * (r0 = 1e-6, r_max = 1e6, v_cap = 1e12, rel_tol = 1e-10, abs_tol = 1e-12).
 */
typedef struct GradsysControls {
  double r0;
  double r_max;
  double v_cap;
  double rel_tol;
  double abs_tol;
} GradsysControls;

/**
 * Terminal report of a trajectory: for blow-ups, `radius` and
 * `uncertainty` localize the singularity; for global runs `radius` is the
 * radius reached.
 */
typedef struct GradsysOutcome {
  enum GradsysOutcomeKind kind;
  double radius;
  double uncertainty;
} GradsysOutcome;

/**
 * Trailing log-log growth fit.
 */
typedef struct GradsysGrowthFit {
  double slope_u;
  double slope_v;
  double log_amp_u;
  double log_amp_v;
  double slope_stderr_u;
  double slope_stderr_v;
  double rms_residual_u;
  double rms_residual_v;
  double window_lo;
  double window_hi;
  size_t n_samples;
} GradsysGrowthFit;

/**
 * Keller-Osserman verdicts on the plain and weighted integrals, plus the
 * classification they imply.
 */
typedef struct GradsysKoReport {
  enum GradsysVerdict plain_verdict;
  double plain_slope;
  enum GradsysVerdict weighted_verdict;
  double weighted_slope;
  enum GradsysClass classification;
} GradsysKoReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gradsys_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated to
 * `cap - 1` bytes, always NUL-terminated) and returns the full length.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes, or be null (in which
 * case only the length is returned).
 */
size_t gradsys_last_error(char *buf, size_t cap);

/**
 * Closed-form boundary classification in a ball.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GradsysStatus gradsys_classify_ball(struct GradsysParams params, enum GradsysClass *out);

/**
 * Whole-space existence predicate (ps + q - 1 <= 0).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GradsysStatus gradsys_global_existence(struct GradsysParams params, bool *out);

/**
 * Asymptotic exponents A, B, K, D and log amplitudes.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GradsysStatus gradsys_asymptotic_profile(struct GradsysParams params,
                                              struct GradsysProfile *out);

/**
 * Linearization data at the attracting equilibrium.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GradsysStatus gradsys_stability(struct GradsysParams params, struct GradsysStability *out);

/**
 * The two equilibria as length-3 arrays (Y, Z, W).
 *
 * # Safety
 * `xi1` and `xi2` must point to at least 3 writable doubles each.
 */
enum GradsysStatus gradsys_equilibria(struct GradsysParams params, double *xi1, double *xi2);

/**
 * Exact min/max of the field divergence over the box [xi1, xi2], and
 * whether the closed-form divergence condition holds.
 *
 * # Safety
 * All out-pointers must be valid.
 */
enum GradsysStatus gradsys_divergence_box(struct GradsysParams params,
                                          double *out_min,
                                          double *out_max,
                                          bool *out_condition);

/**
 * Integrates the radial IVP and returns an owned trajectory handle.
 *
 * # Safety
 * `controls` may be null (defaults); `out` must be a valid pointer. The
 * handle must be released with [`gradsys_trajectory_free`].
 */
enum GradsysStatus gradsys_integrate(struct GradsysParams params,
                                     double u0,
                                     double v0,
                                     const struct GradsysControls *controls,
                                     struct GradsysTrajectory **out);

/**
 * Number of samples in a trajectory (0 for a null handle).
 *
 * # Safety
 * `traj` must be a live handle from [`gradsys_integrate`] or null.
 */
size_t gradsys_trajectory_len(const struct GradsysTrajectory *traj);

/**
 * Terminal outcome of a trajectory.
 *
 * # Safety
 * `traj` must be a live handle; `out` must be valid.
 */
enum GradsysStatus gradsys_trajectory_outcome(const struct GradsysTrajectory *traj,
                                              struct GradsysOutcome *out);

/**
 * Copies up to `cap` samples into the provided column buffers; null column
 * pointers are skipped. Returns the number of samples written.
 *
 * # Safety
 * Non-null columns must point to at least `cap` writable doubles.
 */
size_t gradsys_trajectory_samples(const struct GradsysTrajectory *traj,
                                  double *r,
                                  double *u,
                                  double *du,
                                  double *v,
                                  double *dv,
                                  size_t cap);

/**
 * Empirical boundary classification of a finished trajectory.
 *
 * # Safety
 * `traj` must be a live handle; `out` must be valid.
 */
enum GradsysStatus gradsys_trajectory_classify(const struct GradsysTrajectory *traj,
                                               enum GradsysClass *out);

/**
 * Trailing log-log growth fit over `window_decades` decades.
 *
 * # Safety
 * `traj` must be a live handle; `out` must be valid.
 */
enum GradsysStatus gradsys_trajectory_fit_growth(const struct GradsysTrajectory *traj,
                                                 double window_decades,
                                                 struct GradsysGrowthFit *out);

/**
 * Releases a trajectory handle (null is a no-op).
 *
 * # Safety
 * `traj` must have come from [`gradsys_integrate`] and not be freed twice.
 */
void gradsys_trajectory_free(struct GradsysTrajectory *traj);

/**
 * Localizes the blow-up radius through the given ascending thresholds.
 *
 * # Safety
 * `thresholds` must point to `n_thresholds` doubles; out-pointers valid.
 */
enum GradsysStatus gradsys_blowup_radius(struct GradsysParams params,
                                         double u0,
                                         double v0,
                                         const double *thresholds,
                                         size_t n_thresholds,
                                         double *out_radius,
                                         double *out_uncertainty);

/**
 * Keller-Osserman verdicts for the power-law nonlinearity f(t) = t^s.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GradsysStatus gradsys_ko_power(double s, double p, double q, struct GradsysKoReport *out);

/**
 * Integrates the reduced (Y, Z, W) flow from the given point and reports
 * where it settled plus the terminal point.
 *
 * # Safety
 * `out_limit` must be valid; `out_terminal` must point to 3 writable
 * doubles or be null.
 */
enum GradsysStatus gradsys_phase_limit(struct GradsysParams params,
                                       double y0,
                                       double z0,
                                       double w0,
                                       double t_span,
                                       enum GradsysLimit *out_limit,
                                       double *out_terminal);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADSYS_H */
