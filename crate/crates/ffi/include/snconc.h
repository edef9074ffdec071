#ifndef SNCONC_H
#define SNCONC_H

/* Generated by cbindgen from the snconc-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SncStatus {
  SNC_STATUS_OK = 0,
  SNC_STATUS_DOMAIN = 1,
  SNC_STATUS_CONVERGENCE = 2,
  SNC_STATUS_FACTORIZATION = 3,
  SNC_STATUS_DIMENSION_MISMATCH = 4,
  SNC_STATUS_BOUND_VIOLATION = 5,
  SNC_STATUS_CONFIG = 6,
  SNC_STATUS_IO = 7,
  SNC_STATUS_NULL_POINTER = 8,
  SNC_STATUS_PANIC = 9,
} SncStatus;

typedef enum SncFamily {
  SNC_FAMILY_NORMAL = 0,
  SNC_FAMILY_GAMMA = 1,
  SNC_FAMILY_NEG_EXP = 2,
  SNC_FAMILY_POISSON = 3,
} SncFamily;

typedef enum SncBoundKind {
  SNC_BOUND_KIND_SUB_GAUSSIAN = 0,
  SNC_BOUND_KIND_LINE_CROSSING = 1,
  SNC_BOUND_KIND_BENNETT = 2,
  SNC_BOUND_KIND_BERNSTEIN = 3,
  SNC_BOUND_KIND_EMPIRICAL_BERNSTEIN = 4,
  SNC_BOUND_KIND_STITCHED_GENERAL = 5,
  SNC_BOUND_KIND_STITCHED_PRESET = 6,
  SNC_BOUND_KIND_EMPIRICAL_BERNSTEIN_STITCHED = 7,
  SNC_BOUND_KIND_CONJUGATE_RATE = 8,
  SNC_BOUND_KIND_CONJUGATE_RATE_COROLLARY = 9,
  SNC_BOUND_KIND_WHITEHOUSE = 10,
} SncBoundKind;

/**
 * Opaque ψ handle.
 */
typedef struct SncPsi SncPsi;

/**
 * Opaque process-state handle.
 */
typedef struct SncState SncState;

/**
 * Bound choice. Only the fields used by `kind` are read:
 * `lambda` (fixed-λ bounds), `c` (Bernstein, stitched, Whitehouse), `b` (Bennett),
 * `rho` (empirical Bernstein; optional Whitehouse ρ when finite), `eta` (general stitching),
 * `constant` (conjugate-rate forms), `whitehouse_a` / `whitehouse_b`.
 */
typedef struct SncBoundSpec {
  enum SncBoundKind kind;
  double lambda;
  double c;
  double b;
  double rho;
  double eta;
  double constant;
  double whitehouse_a;
  double whitehouse_b;
} SncBoundSpec;

typedef struct SncBoundResult {
  enum SncBoundKind kind;
  /**
   * Radius as reported by the bound (squared for the sub-Gaussian form); +inf when vacuous.
   */
  double radius;
  /**
   * Threshold on the self-normalized norm.
   */
  double norm_threshold;
  bool valid;
} SncBoundResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *snc_version(void);

/**
 * Message of the last failed call on this thread; valid until the next failing call.
 */
const char *snc_last_error_message(void);

/**
 * Stable upper-case name of a status code.
 */
const char *snc_status_name(enum SncStatus status);

/**
 * ψ of a named family; `c` is ignored for `Normal`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum SncStatus snc_psi_new(enum SncFamily family, double c, struct SncPsi **out);

/**
 * # Safety
 * `psi` must be null or a handle from [`snc_psi_new`] not yet freed.
 */
void snc_psi_free(struct SncPsi *psi);

/**
 * Right end of the domain of ψ (`+inf` when unbounded); NaN for a null handle.
 *
 * # Safety
 * `psi` must be null or a live handle.
 */
double snc_psi_lambda_max(const struct SncPsi *psi);

/**
 * Fresh state `S = 0`, `V = U0`, tagged with a copy of `psi`.
 *
 * # Safety
 * `u0` must point to `dim*dim` doubles, `psi` must be live, `out` writable.
 */
enum SncStatus snc_state_new(size_t dim,
                             const double *u0,
                             const struct SncPsi *psi,
                             struct SncState **out);

/**
 * State from recorded parts; requires `V ⪰ U0`.
 *
 * # Safety
 * `s` must hold `dim` doubles, `v` and `u0` `dim*dim` each; `psi` live; `out` writable.
 */
enum SncStatus snc_state_from_parts(uint64_t t,
                                    size_t dim,
                                    const double *s,
                                    const double *v,
                                    const double *u0,
                                    const struct SncPsi *psi,
                                    struct SncState **out);

/**
 * Empirical-Bernstein accumulator with `U0 = ρI`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SncStatus snc_state_empirical_bernstein(size_t dim, double rho, struct SncState **out);

/**
 * # Safety
 * `state` must be null or a live handle.
 */
void snc_state_free(struct SncState *state);

/**
 * Number of increments absorbed; 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
uint64_t snc_state_t(const struct SncState *state);

/**
 * Dimension; 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t snc_state_dim(const struct SncState *state);

/**
 * `S += η x`, `V += σ² x xᵀ`.
 *
 * # Safety
 * `state` live, `x` holds `dim` doubles.
 */
enum SncStatus snc_state_step_bandit(struct SncState *state,
                                     const double *x,
                                     double eta,
                                     double sigma);

/**
 * `S += x`, `V += x xᵀ` for conditionally symmetric increments.
 *
 * # Safety
 * `state` live, `x` holds `dim` doubles.
 */
enum SncStatus snc_state_step_symmetric(struct SncState *state, const double *x);

/**
 * Empirical-Bernstein update with the running mean.
 *
 * # Safety
 * `state` live, `x` holds `dim` doubles.
 */
enum SncStatus snc_state_step_empirical_bernstein(struct SncState *state, const double *x);

/**
 * ‖S‖_{V^{-1}}.
 *
 * # Safety
 * `state` live, `out` writable.
 */
enum SncStatus snc_state_self_norm(const struct SncState *state, double *out);

/**
 * log det V − log det U0.
 *
 * # Safety
 * `state` live, `out` writable.
 */
enum SncStatus snc_state_log_det_ratio(const struct SncState *state, double *out);

/**
 * Spec with defaults: η = 2, constant = 1, c = 1, A = B = 1, the rest NaN.
 */
struct SncBoundSpec snc_bound_spec_default(enum SncBoundKind kind);

/**
 * Evaluates a bound. A vacuous bound is a success with `valid = false` and infinite radius.
 *
 * # Safety
 * `state` live, `spec` readable, `out` writable.
 */
enum SncStatus snc_bound_eval(const struct SncState *state,
                              const struct SncBoundSpec *spec,
                              double delta,
                              struct SncBoundResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SNCONC_H */
