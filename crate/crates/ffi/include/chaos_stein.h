#ifndef CHAOS_STEIN_H
#define CHAOS_STEIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Distance selector for bound calls.
 */
typedef enum CsMetric {
  CS_METRIC_KOLMOGOROV = 0,
  CS_METRIC_TOTAL_VARIATION = 1,
  CS_METRIC_WASSERSTEIN = 2,
  CS_METRIC_FORTET_MOURIER = 3,
  CS_METRIC_H1 = 4,
  CS_METRIC_H2 = 5,
} CsMetric;

/**
 * Result codes.
 */
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  CS_STATUS_INVALID_ORDER = 3,
  CS_STATUS_SPACE_MISMATCH = 4,
  CS_STATUS_NOT_PSD = 5,
  CS_STATUS_DIVERGENCE = 6,
  CS_STATUS_RESOURCE_LIMIT = 7,
  CS_STATUS_ACCURACY = 8,
  CS_STATUS_PARSE = 9,
  CS_STATUS_BUFFER_TOO_SMALL = 10,
  CS_STATUS_PANIC = 11,
} CsStatus;

/**
 * Opaque symmetric kernel handle.
 */
typedef struct CsKernel CsKernel;

/**
 * Opaque Gram space handle.
 */
typedef struct CsSpace CsSpace;

/**
 * Scalar parts of a bound.
 */
typedef struct CsBound {
  double variance_term;
  double contraction_sum;
  double squared_total;
  double metric_constant;
  double bound;
} CsBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated) and returns its full length in bytes, excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cs_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cs_version(void);

/**
 * Identity Gram matrix of size `dim`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CsStatus cs_space_identity(size_t dim, struct CsSpace **out);

/**
 * Gram space from a row-major `dim x dim` matrix.
 *
 * # Safety
 * `gram` must point to `dim * dim` doubles; `out` must be valid.
 */
enum CsStatus cs_space_new(const double *gram, size_t dim, struct CsSpace **out);

/**
 * # Safety
 * `space` must be null or a handle from `cs_space_*` not yet freed.
 */
void cs_space_free(struct CsSpace *space);

/**
 * Zero kernel of the given order.
 *
 * # Safety
 * `space` must be a live handle; `out` must be valid.
 */
enum CsStatus cs_kernel_new(const struct CsSpace *space, size_t order, struct CsKernel **out);

/**
 * Adds `value` to the symmetric coefficient of the multi-index
 * `index[0..order]` (any ordering; coefficients sum over orderings).
 *
 * # Safety
 * `kernel` must be a live handle; `index` must point to `len` entries.
 */
enum CsStatus cs_kernel_add_entry(struct CsKernel *kernel,
                                  const size_t *index,
                                  size_t len,
                                  double value);

/**
 * Kernel from its JSON form `{dim, order, entries, gram?}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
enum CsStatus cs_kernel_from_json(const char *json, struct CsKernel **out);

/**
 * # Safety
 * `kernel` must be null or a live handle.
 */
void cs_kernel_free(struct CsKernel *kernel);

/**
 * Squared Gram norm of the kernel.
 *
 * # Safety
 * `kernel` must be a live handle; `out` must be valid.
 */
enum CsStatus cs_kernel_norm_sq(const struct CsKernel *kernel, double *out);

/**
 * Normal-approximation bound for `I_q(kernel)`.
 *
 * # Safety
 * `kernel` must be a live handle; `out` must be valid.
 */
enum CsStatus cs_gauss_bound(const struct CsKernel *kernel,
                             size_t q,
                             enum CsMetric metric,
                             struct CsBound *out);

/**
 * Centered-Gamma-approximation bound for `I_q(kernel)`.
 *
 * # Safety
 * `kernel` must be a live handle; `out` must be valid.
 */
enum CsStatus cs_gamma_bound(const struct CsKernel *kernel,
                             size_t q,
                             double nu,
                             enum CsMetric metric,
                             struct CsBound *out);

/**
 * Exact Kolmogorov bound for the Breuer–Major statistic.
 *
 * # Safety
 * `out` must be valid.
 */
enum CsStatus cs_breuer_major_bound(double hurst, size_t q, size_t n, struct CsBound *out);

/**
 * Writes `count` draws of the Breuer–Major statistic into `out`.
 *
 * # Safety
 * `out` must point to `out_len` writable doubles.
 */
enum CsStatus cs_sample_breuer_major(double hurst,
                                     size_t q,
                                     size_t n,
                                     size_t count,
                                     uint64_t seed,
                                     double *out,
                                     size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHAOS_STEIN_H */
