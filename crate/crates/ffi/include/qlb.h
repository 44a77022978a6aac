#ifndef QLB_H
#define QLB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QlbStatus {
  QLB_STATUS_OK = 0,
  QLB_STATUS_INVALID_PARAMETER = 1,
  QLB_STATUS_DIMENSION_MISMATCH = 2,
  QLB_STATUS_INDEX_OUT_OF_RANGE = 3,
  QLB_STATUS_PRECONDITION = 4,
  QLB_STATUS_CSV = 5,
  QLB_STATUS_IO = 6,
  QLB_STATUS_SOLVER = 7,
  QLB_STATUS_JSON = 8,
  QLB_STATUS_NULL_POINTER = 9,
  QLB_STATUS_PANIC = 10,
} QlbStatus;

typedef enum QlbRegime {
  QLB_REGIME_LINF = 0,
  QLB_REGIME_L2 = 1,
} QlbRegime;

typedef enum QlbMode {
  QLB_MODE_CLASSICAL = 0,
  /**
   * Emulated quantum subroutines with the default constants.
   */
  QLB_MODE_QUANTUM = 1,
} QlbMode;

/**
 * Opaque solver report.
 */
typedef struct QlbReport QlbReport;

/**
 * Opaque sample set.
 */
typedef struct QlbSamples QlbSamples;

/**
 * Opaque KP-tree.
 */
typedef struct QlbTree QlbTree;

/**
 * Charged oracle queries.
 */
typedef struct QlbLedger {
  uint64_t q_x;
  uint64_t q_y;
  uint64_t q_tree;
  uint64_t gates;
} QlbLedger;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread. Valid until the next
 * failing call; never null.
 */
const char *qlb_last_error(void);

/**
 * Library version as a static string.
 */
const char *qlb_version(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void qlb_string_free(char *s);

/**
 * An all-zero tree over `d` coordinates.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QlbStatus qlb_tree_new(size_t d, struct QlbTree **out);

/**
 * # Safety
 * `tree` must come from `qlb_tree_new` and not be freed twice.
 */
void qlb_tree_free(struct QlbTree *tree);

/**
 * `theta <- a * theta + b * e_j`.
 *
 * # Safety
 * `tree` must be a live handle.
 */
enum QlbStatus qlb_tree_update(struct QlbTree *tree, double a, double b, size_t j);

/**
 * # Safety
 * `tree` must be a live handle and `out` valid.
 */
enum QlbStatus qlb_tree_read(const struct QlbTree *tree, size_t j, double *out);

/**
 * Dimension of the tree, or 0 for a null handle.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
size_t qlb_tree_dim(const struct QlbTree *tree);

/**
 * Number of nonzero coordinates, or 0 for a null handle.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
size_t qlb_tree_support_len(const struct QlbTree *tree);

/**
 * Writes all `d` coordinates to `out`, which must hold `len >= d` doubles.
 *
 * # Safety
 * `tree` must be a live handle and `out` must point to `len` doubles.
 */
enum QlbStatus qlb_tree_to_dense(const struct QlbTree *tree, double *out, size_t len);

/**
 * Copies an `n x d` row-major matrix and `n` targets into a sample set.
 *
 * # Safety
 * `x` must point to `n * d` doubles, `y` to `n`, and `out` must be valid.
 */
enum QlbStatus qlb_samples_new(const double *x,
                               const double *y,
                               size_t n,
                               size_t d,
                               enum QlbRegime regime,
                               struct QlbSamples **out);

/**
 * Reads a sample file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid.
 */
enum QlbStatus qlb_samples_load_csv(const char *path, struct QlbSamples **out);

/**
 * Planted Lasso (`ridge == false`) or Ridge samples. The planted set is
 * written to `planted`, which must hold `w` indices.
 *
 * # Safety
 * `planted` must point to `w` slots (or be null to skip) and `out` be valid.
 */
enum QlbStatus qlb_samples_gen_hidden(size_t d,
                                      size_t w,
                                      double p,
                                      size_t m,
                                      uint64_t seed,
                                      bool ridge,
                                      size_t *planted,
                                      struct QlbSamples **out);

/**
 * # Safety
 * `samples` must come from this library and not be freed twice.
 */
void qlb_samples_free(struct QlbSamples *samples);

/**
 * # Safety
 * `samples` must be null or a live handle.
 */
size_t qlb_samples_n(const struct QlbSamples *samples);

/**
 * # Safety
 * `samples` must be null or a live handle.
 */
size_t qlb_samples_d(const struct QlbSamples *samples);

/**
 * Whether every sample obeys the set's normalisation; false for null.
 *
 * # Safety
 * `samples` must be null or a live handle.
 */
bool qlb_samples_is_valid(const struct QlbSamples *samples);

/**
 * An `eps`-minimizer of the Lasso loss.
 *
 * # Safety
 * `samples` must be a live handle and `out` valid.
 */
enum QlbStatus qlb_lasso_solve(const struct QlbSamples *samples,
                               double eps,
                               enum QlbMode mode,
                               uint64_t seed,
                               struct QlbReport **out);

/**
 * Projected gradient descent over the unit l2 ball.
 *
 * # Safety
 * `samples` must be a live handle and `out` valid.
 */
enum QlbStatus qlb_ridge_solve(const struct QlbSamples *samples,
                               double eps,
                               size_t max_iter,
                               struct QlbReport **out);

/**
 * # Safety
 * `report` must come from this library and not be freed twice.
 */
void qlb_report_free(struct QlbReport *report);

/**
 * Empirical loss of the returned iterate; NaN for null.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double qlb_report_objective(const struct QlbReport *report);

/**
 * Writes the dense iterate to `out`, which must hold `len >= d` doubles.
 *
 * # Safety
 * `report` must be a live handle and `out` must point to `len` doubles.
 */
enum QlbStatus qlb_report_theta(const struct QlbReport *report, double *out, size_t len);

/**
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum QlbStatus qlb_report_ledger(const struct QlbReport *report, struct QlbLedger *out);

/**
 * The report as JSON. Free the string with `qlb_string_free`.
 *
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum QlbStatus qlb_report_json(const struct QlbReport *report, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLB_H */
