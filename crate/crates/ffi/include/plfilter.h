#ifndef PLFILTER_H
#define PLFILTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_UTF8 = 2,
  PL_STATUS_INVALID_INPUT = 3,
  PL_STATUS_SCHEMA = 4,
  PL_STATUS_IO = 5,
  PL_STATUS_EMPTY_REGION = 10,
  PL_STATUS_UNBOUNDED = 11,
  PL_STATUS_DEGENERATE_REGION = 12,
  PL_STATUS_START_FAILURE = 20,
  PL_STATUS_INSUFFICIENT_SAMPLES = 21,
  PL_STATUS_UNSUPPORTED_DIMENSION = 22,
  PL_STATUS_INSUFFICIENT_DATA = 30,
  PL_STATUS_NO_CROSSING = 31,
  PL_STATUS_UNSUPPORTED = 40,
  PL_STATUS_PANIC = 99,
} PlStatus;

/**
 * Opaque mode-sum handle.
 */
typedef struct PlModeSum PlModeSum;

/**
 * Opaque problem handle.
 */
typedef struct PlProblem PlProblem;

/**
 * Moments of the objective at one β.
 */
typedef struct PlMoments {
  double beta;
  double log_z;
  double mean;
  double variance;
} PlMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a problem JSON document into `*out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PlStatus pl_problem_from_json(const char *json, struct PlProblem **out);

/**
 * # Safety
 * `p` must come from [`pl_problem_from_json`] or be null.
 */
void pl_problem_free(struct PlProblem *p);

/**
 * Number of decision variables, 0 for a null handle.
 *
 * # Safety
 * `p` must be a live handle or null.
 */
size_t pl_problem_dimension(const struct PlProblem *p);

/**
 * Exact mode sum of a linear program, or of an unconstrained quadratic
 * program of even dimension.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum PlStatus pl_mode_sum_from_problem(const struct PlProblem *p, struct PlModeSum **out);

/**
 * Parse `{"modes":[{"gamma":..,"coeffs":[..]}]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum PlStatus pl_mode_sum_from_json(const char *json, struct PlModeSum **out);

/**
 * Serialize to JSON; release the string with [`pl_string_free`].
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum PlStatus pl_mode_sum_to_json(const struct PlModeSum *m, char **out);

/**
 * # Safety
 * `m` must be a live handle or null.
 */
size_t pl_mode_sum_len(const struct PlModeSum *m);

/**
 * `ln Z`, `⟨O⟩` and `Var O` at `beta`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum PlStatus pl_mode_sum_eval(const struct PlModeSum *m, double beta, struct PlMoments *out);

/**
 * # Safety
 * `m` must come from a `pl_mode_sum_*` constructor or be null.
 */
void pl_mode_sum_free(struct PlModeSum *m);

/**
 * Grid-quadrature `Z(beta)` with `resolution` points per axis (n ≤ 3).
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum PlStatus pl_brute_force_z(const struct PlProblem *p,
                               double beta,
                               size_t resolution,
                               double *out);

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library; valid until the next call.
 */
const char *pl_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void pl_string_free(char *s);

/**
 * Library version, a static NUL-terminated string.
 */
const char *pl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLFILTER_H */
