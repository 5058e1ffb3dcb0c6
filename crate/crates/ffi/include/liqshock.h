#ifndef LIQSHOCK_H
#define LIQSHOCK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Per-node series held by a solution.
 */
typedef enum LqsField {
  LQS_FIELD_NODES = 0,
  /**
   * `p` at issue time.
   */
  LQS_FIELD_PRICE_LIQUID = 1,
  /**
   * `q` at issue time.
   */
  LQS_FIELD_PRICE_ILLIQUID = 2,
  /**
   * `R⁰ = U/γ` at issue time.
   */
  LQS_FIELD_VALUE_LIQUID = 3,
  /**
   * `R¹ = V/γ` at issue time.
   */
  LQS_FIELD_VALUE_ILLIQUID = 4,
} LqsField;

typedef enum LqsGrid {
  LQS_GRID_UNIFORM = 0,
  LQS_GRID_TAVELLA_RANDALL = 1,
} LqsGrid;

typedef enum LqsScheme {
  LQS_SCHEME_LINEAR = 0,
  LQS_SCHEME_LINEARIZED = 1,
} LqsScheme;

typedef enum LqsStatus {
  LQS_STATUS_OK = 0,
  LQS_STATUS_NULL_POINTER = 1,
  LQS_STATUS_INVALID_ARGUMENT = 2,
  LQS_STATUS_NUMERICAL = 3,
  LQS_STATUS_IO = 4,
  LQS_STATUS_PANIC = 5,
} LqsStatus;

/**
 * Opaque market/utility parameter set.
 */
typedef struct LqsParams LqsParams;

/**
 * Opaque solved grid at issue time.
 */
typedef struct LqsSolution LqsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `lqs_*` call on this thread.
 */
const char *lqs_last_error_message(void);

/**
 * Reference market: μ=0.06, σ=0.3, ν₀₁=1, ν₁₀=12, K=2, T=1, S ∈ [0, 5], γ=1.
 */
struct LqsParams *lqs_params_reference(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum LqsStatus lqs_params_new(double sigma,
                              double mu,
                              double gamma,
                              double nu01,
                              double nu10,
                              double strike,
                              double horizon,
                              double s_min,
                              double s_max,
                              struct LqsParams **out);

/**
 * # Safety
 * `params` must come from this library and not be freed twice. Null is ignored.
 */
void lqs_params_free(struct LqsParams *params);

/**
 * `(F₀(t), F₁(t))` of the no-option value functions.
 *
 * # Safety
 * `params` must be a live handle; `f0`, `f1` must be writable.
 */
enum LqsStatus lqs_f_values(const struct LqsParams *params, double t, double *f0, double *f1);

/**
 * `(2^p·w − z)/(2^p − 1)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LqsStatus lqs_richardson(double z, double w, uint32_t p, double *out);

/**
 * Solve with the natural left boundary and `Δτ = min ΔS / 2`.
 *
 * # Safety
 * `params` must be a live handle; `out` must be writable.
 */
enum LqsStatus lqs_solve(const struct LqsParams *params,
                         enum LqsScheme scheme,
                         enum LqsGrid grid,
                         double alpha,
                         size_t intervals,
                         struct LqsSolution **out);

/**
 * Number of grid nodes, 0 for a null handle.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
size_t lqs_solution_len(const struct LqsSolution *sol);

/**
 * Steps whose time-step restriction was exceeded, 0 for a null handle.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
size_t lqs_solution_restriction_violations(const struct LqsSolution *sol);

/**
 * Copy one series into `buf`, which must hold `len >= lqs_solution_len` values.
 *
 * # Safety
 * `sol` must be a live handle; `buf` must be writable for `len` doubles.
 */
enum LqsStatus lqs_solution_copy(const struct LqsSolution *sol,
                                 enum LqsField field,
                                 double *buf,
                                 size_t len);

/**
 * `R⁰` (`illiquid == false`) or `R¹` at `s`, by linear interpolation.
 *
 * # Safety
 * `sol` must be a live handle; `out` must be writable.
 */
enum LqsStatus lqs_solution_value_at(const struct LqsSolution *sol,
                                     bool illiquid,
                                     double s,
                                     double *out);

/**
 * # Safety
 * `sol` must come from [`lqs_solve`] and not be freed twice. Null is ignored.
 */
void lqs_solution_free(struct LqsSolution *sol);

/**
 * `R⁰` and `R¹` at the strike for each of `n_levels` doubling levels.
 *
 * # Safety
 * `params` must be a live handle; `levels` readable and `out_r0`, `out_r1`
 * writable for `n_levels` entries.
 */
enum LqsStatus lqs_convergence_values(const struct LqsParams *params,
                                      enum LqsScheme scheme,
                                      enum LqsGrid grid,
                                      double alpha,
                                      const size_t *levels,
                                      size_t n_levels,
                                      double *out_r0,
                                      double *out_r1);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lqs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIQSHOCK_H */
