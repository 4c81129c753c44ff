#ifndef MZERO_H
#define MZERO_H

/* Generated by cbindgen from crates/mzero-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Variant code for [`mz_thresholds`]: double zero, normalized form.
 */
#define MZ_VARIANT_NORMALIZED_DOUBLE 0

/**
 * Variant code for [`mz_thresholds`]: triple zero, normalized form.
 */
#define MZ_VARIANT_NORMALIZED_TRIPLE 1

/**
 * Variant code for [`mz_thresholds`]: triple zero, self-normalizing.
 */
#define MZ_VARIANT_GENERAL_TRIPLE 2

/**
 * Status codes returned by every fallible function.
 */
typedef enum MzStatus {
  /**
   * Success.
   */
  MZ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MZ_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  MZ_STATUS_INVALID_UTF8 = 2,
  /**
   * The system text could not be parsed.
   */
  MZ_STATUS_SYNTAX = 3,
  /**
   * Any other input error (dimensions, arguments, non-finite values).
   */
  MZ_STATUS_INVALID_INPUT = 4,
  /**
   * A numerical-domain failure (singular Jacobian, wrong corank, …).
   */
  MZ_STATUS_NUMERICAL = 5,
  /**
   * An internal panic was caught.
   */
  MZ_STATUS_PANIC = 6,
} MzStatus;

/**
 * Opaque handle to a parsed polynomial system.
 */
typedef struct MzSystem MzSystem;

/**
 * A complex number.
 */
typedef struct MzComplex {
  /**
   * Real part.
   */
  double re;
  /**
   * Imaginary part.
   */
  double im;
} MzComplex;

/**
 * Summary of a cluster certificate.
 */
typedef struct MzCertificate {
  /**
   * Multiplicity used.
   */
  size_t mu;
  /**
   * Radius `d/(4γ_μ^μ)` of the certified ball.
   */
  double radius;
  /**
   * Left-hand side of the certificate inequality.
   */
  double lhs;
  /**
   * Right-hand side of the certificate inequality.
   */
  double rhs;
  /**
   * `‖f(x)‖`.
   */
  double residual_norm;
  /**
   * `γ_μ` of the truncated system.
   */
  double gamma;
  /**
   * 1 if `lhs < rhs` (the ball contains `μ` zeros), else 0.
   */
  int32_t holds;
} MzCertificate;

/**
 * Convergence thresholds of one iteration variant.
 */
typedef struct MzThresholds {
  /**
   * Multiplicity the variant applies to.
   */
  size_t mu;
  /**
   * Threshold below which the error decreases.
   */
  double u_converge;
  /**
   * Threshold below which the error contracts quadratically.
   */
  double u_quadratic;
} MzThresholds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a system from NUL-terminated text and stores a new handle in
 * `*out` (set to null on failure).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` valid for a
 * pointer write.
 */
enum MzStatus mz_system_parse(const char *text, struct MzSystem **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sys` must be null or a handle from [`mz_system_parse`] that has not
 * been freed.
 */
void mz_system_free(struct MzSystem *sys);

/**
 * Number of variables (0 for a null handle).
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t mz_system_nvars(const struct MzSystem *sys);

/**
 * Multiplicity of the simple multiple zero at `point` (length `len`),
 * detected from the breadth-one dual basis.
 *
 * # Safety
 * Pointers must be valid: `point` for `len` reads, `mu_out` for a write.
 */
enum MzStatus mz_multiplicity(const struct MzSystem *sys,
                              const struct MzComplex *point,
                              size_t len,
                              size_t *mu_out);

/**
 * Local separation bound `d/(2γ_μ^μ)` at a zero of multiplicity `mu`.
 * `certified` selects Frobenius bounds (non-zero) or power-method
 * estimates (zero) for tensors without an exact norm.
 *
 * # Safety
 * Pointers must be valid: `point` for `len` reads, `out` for a write.
 */
enum MzStatus mz_separation_bound(const struct MzSystem *sys,
                                  const struct MzComplex *point,
                                  size_t len,
                                  size_t mu,
                                  int32_t certified,
                                  double *out);

/**
 * Cluster certificate at an approximate zero of multiplicity `mu`. A
 * negative certificate (`holds == 0`) is still [`MzStatus::Ok`].
 *
 * # Safety
 * Pointers must be valid: `point` for `len` reads, `out` for a write.
 */
enum MzStatus mz_certify(const struct MzSystem *sys,
                         const struct MzComplex *point,
                         size_t len,
                         size_t mu,
                         int32_t certified,
                         struct MzCertificate *out);

/**
 * Refines an approximate zero of multiplicity `mu` with the
 * self-normalizing modified Newton iteration. Writes the final iterate to
 * `out_point` (length `len`), the number of iterations to `iterations`,
 * and 1/0 to `converged`. Non-convergence is not an error.
 *
 * # Safety
 * Pointers must be valid: `point` for `len` reads, `out_point` for `len`
 * writes, `iterations` and `converged` for a write each.
 */
enum MzStatus mz_refine(const struct MzSystem *sys,
                        const struct MzComplex *point,
                        size_t len,
                        size_t mu,
                        double eps,
                        size_t max_iter,
                        struct MzComplex *out_point,
                        size_t *iterations,
                        int32_t *converged);

/**
 * Convergence thresholds of a variant (`MZ_VARIANT_*`).
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum MzStatus mz_thresholds(int32_t variant, struct MzThresholds *out);

/**
 * Message of the last failure on this thread, or null if the last call
 * succeeded. The pointer stays valid until the next call into this
 * library on the same thread.
 */
const char *mz_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MZERO_H */
