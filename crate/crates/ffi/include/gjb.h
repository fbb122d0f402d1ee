#ifndef GJB_H
#define GJB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GjbStatus {
  GJB_STATUS_OK = 0,
  GJB_STATUS_NULL_POINTER = 1,
  GJB_STATUS_INVALID_ARGUMENT = 2,
  GJB_STATUS_EMPTY_SAMPLE = 3,
  GJB_STATUS_ZERO_VARIANCE = 4,
  GJB_STATUS_SINGULAR_COVARIANCE = 5,
  GJB_STATUS_DEGENERATE_LAW = 6,
  GJB_STATUS_INTERNAL = 99,
} GjbStatus;

typedef enum GjbCalibration {
  GJB_CALIBRATION_EXACT = 0,
  GJB_CALIBRATION_LEGACY = 1,
} GjbCalibration;

/**
 * A prepared null hypothesis `SN(alpha)`.
 */
typedef struct GjbHypothesis GjbHypothesis;

/**
 * Result of one test.
 */
typedef struct GjbOutcome GjbOutcome;

/**
 * Asymptotic covariance of the (kurtosis, skewness) pair.
 */
typedef struct GjbSigma {
  double s11;
  double s22;
  double s12;
  double det;
} GjbSigma;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *gjb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gjb_version(void);

/**
 * Writes the raw moments of orders 0..=8 of `SN(alpha)` into `out[9]`.
 *
 * # Safety
 * `out` must point to 9 writable doubles.
 */
enum GjbStatus gjb_raw_moments(double alpha, double *out);

/**
 * Analytic covariance for `SN(alpha)`.
 *
 * # Safety
 * `out` must point to a writable `GjbSigma`.
 */
enum GjbStatus gjb_sigma_analytic(double alpha,
                                  enum GjbCalibration calibration,
                                  struct GjbSigma *out);

/**
 * Upper tail of the chi-squared law with `dof` degrees of freedom.
 *
 * # Safety
 * `out` must point to a writable double.
 */
enum GjbStatus gjb_chi2_survival(double x, uint32_t dof, double *out);

/**
 * Fills `out[0..n]` with a seeded `SN(alpha)` sample. The values equal
 * those written by `gjb sample` with the same arguments.
 *
 * # Safety
 * `out` must point to `n` writable doubles.
 */
enum GjbStatus gjb_sample(double alpha, size_t n, uint64_t seed, double *out);

/**
 * Prepares the null hypothesis `SN(alpha)` with the analytic covariance.
 *
 * # Safety
 * `out` must point to a writable handle pointer. On success it receives a
 * handle to release with `gjb_hypothesis_free`.
 */
enum GjbStatus gjb_hypothesis_new(double alpha,
                                  enum GjbCalibration calibration,
                                  struct GjbHypothesis **out);

/**
 * Kurtosis and skewness under the hypothesis.
 *
 * # Safety
 * `h` must be a live handle; `kurtosis` and `skewness` must be writable.
 */
enum GjbStatus gjb_hypothesis_shape(const struct GjbHypothesis *h,
                                    double *kurtosis,
                                    double *skewness);

/**
 * Tests `data[0..len]`, repeated `k` times, against the hypothesis.
 *
 * # Safety
 * `h` must be a live handle, `data` must point to `len` readable doubles
 * and `out` to a writable handle pointer. Release the result with
 * `gjb_outcome_free`.
 */
enum GjbStatus gjb_hypothesis_test(const struct GjbHypothesis *h,
                                   const double *data,
                                   size_t len,
                                   size_t k,
                                   struct GjbOutcome **out);

/**
 * Releases a hypothesis handle. NULL is ignored.
 *
 * # Safety
 * `h` must be NULL or a handle not yet freed.
 */
void gjb_hypothesis_free(struct GjbHypothesis *h);

/**
 * Test statistic.
 *
 * # Safety
 * `o` must be NULL or a live handle. NULL yields NaN.
 */
double gjb_outcome_statistic(const struct GjbOutcome *o);

/**
 * p-value.
 *
 * # Safety
 * `o` must be NULL or a live handle. NULL yields NaN.
 */
double gjb_outcome_p_value(const struct GjbOutcome *o);

/**
 * Effective sample size (observations times duplication factor).
 *
 * # Safety
 * `o` must be NULL or a live handle. NULL yields 0.
 */
size_t gjb_outcome_n(const struct GjbOutcome *o);

/**
 * Empirical kurtosis and skewness of the tested sample.
 *
 * # Safety
 * `o` must be a live handle; `kurtosis` and `skewness` must be writable.
 */
enum GjbStatus gjb_outcome_empirical_shape(const struct GjbOutcome *o,
                                           double *kurtosis,
                                           double *skewness);

/**
 * Covariance used by the test.
 *
 * # Safety
 * `o` must be a live handle and `out` writable.
 */
enum GjbStatus gjb_outcome_sigma(const struct GjbOutcome *o, struct GjbSigma *out);

/**
 * Releases an outcome handle. NULL is ignored.
 *
 * # Safety
 * `o` must be NULL or a handle not yet freed.
 */
void gjb_outcome_free(struct GjbOutcome *o);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GJB_H */
