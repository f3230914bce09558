#ifndef BEAMFLAT_H
#define BEAMFLAT_H

/* Generated by cbindgen from beamflat-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every API call.
 */
typedef enum BfStatus {
  BF_OK = 0,
  /**
   * a pointer argument was NULL or an index was out of bounds
   */
  BF_NULL_ARGUMENT = 1,
  /**
   * a string argument was not valid UTF-8 / JSON, or a parameter was
   * outside its documented range
   */
  BF_INVALID_ARGUMENT = 2,
  /**
   * the computation failed (truncation, divergence, rank deficiency, ...)
   */
  BF_NUMERIC = 3,
  /**
   * a panic crossed the boundary; the library state is still consistent
   */
  BF_PANIC = 4,
} BfStatus;

/**
 * Opaque generating-function table (levels 0..=K on a uniform grid).
 */
typedef struct BfGenTable BfGenTable;

/**
 * Opaque beam parameter set.
 */
typedef struct BfParams BfParams;

/**
 * Opaque open-loop transfer plan.
 */
typedef struct BfPlan BfPlan;

/**
 * Opaque finite-difference run result.
 */
typedef struct BfSimResult BfSimResult;

/**
 * Opaque eigenvalue set.
 */
typedef struct BfSpectrum BfSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread (empty string if none).
 * The pointer is valid until the next failing call on the same thread.
 */
const char *bf_last_error_message(void);

/**
 * Parse beam parameters from their JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string, `out` a valid pointer.
 */
enum BfStatus bf_params_from_json(const char *json, struct BfParams **out);

/**
 * # Safety
 * `p` must come from `bf_params_from_json` (or be NULL) and not be reused.
 */
void bf_params_free(struct BfParams *p);

/**
 * Compute the generating-function cascade up to level `k_max` on a grid of
 * `grid_n` intervals.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum BfStatus bf_gentable_compute(const struct BfParams *params,
                                  size_t k_max,
                                  size_t grid_n,
                                  struct BfGenTable **out);

/**
 * Copy the boundary values g_k(L), g_{k,x}(L), h_k(L), h_{k,x}(L) for
 * k = 0..len-1 into the caller's buffers; `len` must be at most K + 1.
 *
 * # Safety
 * The four buffers must hold at least `len` doubles each.
 */
enum BfStatus bf_gentable_boundary_values(const struct BfGenTable *table,
                                          double *gl,
                                          double *gxl,
                                          double *hl,
                                          double *hxl,
                                          size_t len);

/**
 * # Safety
 * `t` must come from `bf_gentable_compute` (or be NULL) and not be reused.
 */
void bf_gentable_free(struct BfGenTable *t);

/**
 * Build a transfer plan between the states generated by the two trajectory
 * generators (JSON grammar: constant / poly_exp / sinusoid / sum).
 *
 * # Safety
 * `params`, `y0_json`, `yt_json` and `out` must be valid pointers.
 */
enum BfStatus bf_plan_build(const struct BfParams *params,
                            const char *y0_json,
                            const char *yt_json,
                            double t_horizon,
                            double s,
                            size_t n,
                            struct BfPlan **out);

/**
 * f^N(t).
 *
 * # Safety
 * `plan` and `out` must be valid pointers.
 */
enum BfStatus bf_plan_eval_control(const struct BfPlan *plan, double t, double *out);

/**
 * partial_x^a partial_t^b of the planned field at (x, t); a <= 4, b <= 2.
 *
 * # Safety
 * `plan` and `out` must be valid pointers.
 */
enum BfStatus bf_plan_eval_w(const struct BfPlan *plan,
                             double x,
                             double t,
                             size_t x_order,
                             size_t t_order,
                             double *out);

/**
 * L2(0, T) distance between the controls truncated at two levels.
 *
 * # Safety
 * `plan` and `out` must be valid pointers.
 */
enum BfStatus bf_plan_control_l2_gap(const struct BfPlan *plan,
                                     size_t n_lo,
                                     size_t n_hi,
                                     double *out);

/**
 * # Safety
 * `p` must come from `bf_plan_build` (or be NULL) and not be reused.
 */
void bf_plan_free(struct BfPlan *p);

/**
 * Integrate the beam under the plan's control from the plan's own induced
 * initial state. `nx` is the number of spatial intervals, `dt` the step.
 *
 * # Safety
 * `params`, `plan` and `out` must be valid pointers.
 */
enum BfStatus bf_simulate_plan(const struct BfParams *params,
                               const struct BfPlan *plan,
                               size_t nx,
                               double dt,
                               struct BfSimResult **out);

/**
 * Full H2 norm of the terminal deflection and L2 norm of the terminal
 * velocity. Either output pointer may be NULL to skip it.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum BfStatus bf_sim_terminal_norms(const struct BfSimResult *result, double *h2_w, double *l2_wt);

/**
 * Number of recorded snapshots.
 *
 * # Safety
 * `result` and `out` must be valid pointers.
 */
enum BfStatus bf_sim_snapshot_count(const struct BfSimResult *result, size_t *out);

/**
 * Tip trace at snapshot `i`: time, w(0,t), w_x(0,t).
 *
 * # Safety
 * All pointers must be valid.
 */
enum BfStatus bf_sim_tip_at(const struct BfSimResult *result,
                            size_t i,
                            double *t,
                            double *w0,
                            double *wx0);

/**
 * # Safety
 * `r` must come from `bf_simulate_plan` (or be NULL) and not be reused.
 */
void bf_sim_free(struct BfSimResult *r);

/**
 * Locate up to `n_max` imaginary-axis eigenvalues with |omega| <= omega_max.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum BfStatus bf_eigenvalues(const struct BfParams *params,
                             double omega_max,
                             size_t n_max,
                             struct BfSpectrum **out);

/**
 * Number of located modes.
 *
 * # Safety
 * `spectrum` and `out` must be valid pointers.
 */
enum BfStatus bf_spectrum_len(const struct BfSpectrum *spectrum, size_t *out);

/**
 * Mode `i`: eigenfrequency, u(0) under u_x(0) = 1, and the two clamped-end
 * residuals. Any output pointer may be NULL to skip that field.
 *
 * # Safety
 * `spectrum` must be a valid pointer.
 */
enum BfStatus bf_spectrum_mode(const struct BfSpectrum *spectrum,
                               size_t i,
                               double *omega,
                               double *u0,
                               double *residual_u,
                               double *residual_ux);

/**
 * # Safety
 * `s` must come from `bf_eigenvalues` (or be NULL) and not be reused.
 */
void bf_spectrum_free(struct BfSpectrum *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BEAMFLAT_H */
