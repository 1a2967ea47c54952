#ifndef BESSELREG_H
#define BESSELREG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum BrStatus {
  BR_STATUS_OK = 0,
  BR_STATUS_NULL_POINTER = 1,
  BR_STATUS_INVALID_ARGUMENT = 2,
  BR_STATUS_INVALID_DATA = 3,
  BR_STATUS_RANK_DEFICIENT = 4,
  BR_STATUS_DOMAIN = 5,
  BR_STATUS_SOLVER = 6,
  BR_STATUS_SINGULAR_INFORMATION = 7,
  BR_STATUS_IO = 8,
  BR_STATUS_PANIC = 99,
} BrStatus;

// Regression family.
typedef enum BrModel {
  BR_MODEL_BESSEL = 0,
  BR_MODEL_BETA = 1,
} BrModel;

// Opaque dataset handle.
typedef struct BrDataset BrDataset;

// Opaque fit handle.
typedef struct BrFit BrFit;

// DBB test summary. `d_bessel` and `d_beta` are NaN when the pre-check
// already selects beta.
typedef struct BrDbbResult {
  double mean_sq_response;
  double variance_bound_sum;
  double d_bessel;
  double d_beta;
  enum BrModel decision;
} BrDbbResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next call on the same thread.
const char *br_last_error(void);

// Library version as a static NUL-terminated string.
const char *br_version(void);

// Build a dataset from `z` (length `n`), `x` (`n x p`) and `v` (`n x q`).
//
// # Safety
// The arrays must hold at least `n`, `n * p` and `n * q` doubles and `out`
// must be writable.
enum BrStatus br_dataset_new(const double *z,
                             size_t n,
                             const double *x,
                             size_t p,
                             const double *v,
                             size_t q,
                             struct BrDataset **out);

// Load a bundled dataset: "stress-anxiety", "weather-task" or "bodyfat".
//
// # Safety
// `name` must be a NUL-terminated string and `out` writable.
enum BrStatus br_dataset_preset(const char *name, struct BrDataset **out);

// # Safety
// `d` must come from a `br_dataset_*` constructor (or be NULL) and must
// not be used afterwards.
void br_dataset_free(struct BrDataset *d);

// Writes `n`, `p` and `q` of a dataset.
//
// # Safety
// All pointers must be valid.
enum BrStatus br_dataset_dims(const struct BrDataset *d, size_t *n, size_t *p, size_t *q);

// Fit `model` to `d`.
//
// # Safety
// `d` must be a live dataset handle and `out` writable.
enum BrStatus br_fit(const struct BrDataset *d, enum BrModel model, struct BrFit **out);

// # Safety
// `f` must come from `br_fit` (or be NULL) and must not be used afterwards.
void br_fit_free(struct BrFit *f);

// Number of coefficients (`p + q`), or 0 for NULL.
//
// # Safety
// `f` must be a live fit handle or NULL.
size_t br_fit_len(const struct BrFit *f);

// Copy estimates (mean block first) and standard errors into arrays of
// length `len`, which must equal `br_fit_len`. Either array may be NULL.
//
// # Safety
// Non-NULL arrays must hold `len` doubles.
enum BrStatus br_fit_coefficients(const struct BrFit *f,
                                  double *estimates,
                                  double *std_errors,
                                  size_t len);

// Log-likelihood at the estimate, NaN for NULL.
//
// # Safety
// `f` must be a live fit handle or NULL.
double br_fit_loglik(const struct BrFit *f);

// 1 when the fit converged, 0 otherwise (including NULL).
//
// # Safety
// `f` must be a live fit handle or NULL.
int br_fit_converged(const struct BrFit *f);

// Pearson residuals of `f` evaluated on `d` into `out` (length `n`).
//
// # Safety
// Handles must be live and `out` must hold `n` doubles.
enum BrStatus br_pearson_residuals(const struct BrFit *f,
                                   const struct BrDataset *d,
                                   double *out,
                                   size_t n);

// Run the DBB test on `d`.
//
// # Safety
// `d` must be a live dataset handle and `out` writable.
enum BrStatus br_dbb(const struct BrDataset *d, struct BrDbbResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BESSELREG_H */
