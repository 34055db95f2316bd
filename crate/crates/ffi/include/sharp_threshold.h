#ifndef SHARP_THRESHOLD_H
#define SHARP_THRESHOLD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdint.h>
#include <stddef.h>
#include <stdbool.h>

typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_ARGUMENT = 2,
  ST_STATUS_PARSE_ERROR = 3,
  ST_STATUS_ARITY = 4,
  ST_STATUS_NOT_MONOTONE = 5,
  ST_STATUS_TRIVIAL_SET = 6,
  ST_STATUS_NO_SYMMETRY = 7,
  ST_STATUS_BUFFER_TOO_SMALL = 8,
  ST_STATUS_PANIC = 99,
} StStatus;

/**
 * Opaque handle to a tabulated Boolean function.
 */
typedef struct StFunction StFunction;

typedef struct StThreshold {
  double p_lo;
  double p_hi;
  double width;
} StThreshold;

typedef struct StBound {
  double lhs;
  double rhs;
  double slack;
  bool pass;
} StBound;

typedef struct StEstimate {
  double mean;
  double stderr;
  double ci_lo;
  double ci_hi;
  uint64_t samples;
} StEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Owned by the
 * library; valid until the next call.
 */
const char *st_last_error(void);

/**
 * Parses `n=<arity>:hex=<digits>`.
 *
 * # Safety
 * `table` must be a nul-terminated string; `out` must be writable.
 */
enum StStatus st_function_from_hex(const char *table, struct StFunction **out);

/**
 * Builds a family such as `tribes:k=2,m=3` or `or:n=8`.
 *
 * # Safety
 * `spec` must be a nul-terminated string; `out` must be writable.
 */
enum StStatus st_function_from_family(const char *spec, struct StFunction **out);

/**
 * # Safety
 * `f` must come from a constructor of this library and not be freed twice.
 */
void st_function_free(struct StFunction *f);

/**
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum StStatus st_function_arity(const struct StFunction *f, size_t *out);

/**
 * `mu_p(A)` of the set where `f` is 1.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum StStatus st_mu(const struct StFunction *f, double p, double *out);

/**
 * Influence of coordinate `i` (1-based).
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum StStatus st_influence(const struct StFunction *f, double p, size_t i, double *out);

/**
 * All influences into `out[0..len]`; `len` must be at least the arity.
 *
 * # Safety
 * `f` must be a live handle; `out` must point to `len` writable doubles.
 */
enum StStatus st_influences(const struct StFunction *f, double p, double *out, size_t len);

/**
 * `d mu_p / dp`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum StStatus st_russo_derivative(const struct StFunction *f, double p, double *out);

/**
 * `p(1 - eps) - p(eps)` for a nontrivial monotone `f`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum StStatus st_threshold_width(const struct StFunction *f,
                                 double eps,
                                 double tol,
                                 struct StThreshold *out);

/**
 * The largest influence against its lower bound.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum StStatus st_max_influence_bound(const struct StFunction *f, double p, struct StBound *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum StStatus st_c_ls(double p, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum StStatus st_s_of_n(uint64_t n, double *out);

/**
 * Monte Carlo estimate of `mu_p` for a family (`or:n=50`, ...) or for
 * `connectivity:m=<vertices>`.
 *
 * # Safety
 * `spec` must be a nul-terminated string; `out` must be writable.
 */
enum StStatus st_mc_mu(const char *spec,
                       double p,
                       uint64_t samples,
                       uint64_t seed,
                       struct StEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHARP_THRESHOLD_H */
