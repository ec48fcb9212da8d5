#ifndef MIYAZAWA_H
#define MIYAZAWA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>
typedef struct MzResult MzResult;

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  /**
   * Success.
   */
  MZ_STATUS_OK = 0,
  /**
   * Input data failed validation (schema, balance, group set, scenario).
   */
  MZ_STATUS_VALIDATION = 1,
  /**
   * The system is numerically unusable (non-productive or singular).
   */
  MZ_STATUS_NUMERICAL = 2,
  /**
   * A file could not be read.
   */
  MZ_STATUS_IO = 3,
  /**
   * A required pointer argument was null.
   */
  MZ_STATUS_NULL_ARGUMENT = 4,
  /**
   * A string argument was not valid UTF-8.
   */
  MZ_STATUS_INVALID_UTF8 = 5,
  /**
   * An index or buffer length was out of range.
   */
  MZ_STATUS_RANGE = 6,
} MzStatus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, empty when the last
 * call succeeded. The pointer stays valid until the next failing call.
 */
const char *mz_last_error(void);

/**
 * Runs the full pipeline on the given input files and hands back a result.
 *
 * `out_dir` may be null to skip writing report files. On success `*out`
 * owns the handle and `MzStatus::Ok` is returned.
 *
 * # Safety
 * Path arguments must be null-terminated strings; `out` must be a valid
 * pointer to writable storage.
 */
MzStatus mz_run(const char *sectors_path,
                const char *households_path,
                const char *scenario_path,
                const char *out_dir,
                bool open_model,
                MzResult **out);

/**
 * Number of household groups in the result.
 */
uintptr_t mz_result_group_count(const MzResult *result);

/**
 * Baseline income per group, million Rp. `len` must be at least the
 * group count.
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
MzStatus mz_result_baseline_income(const MzResult *result, double *buf, uintptr_t len);

/**
 * Income decline per group (positive values), million Rp.
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
MzStatus mz_result_income_decline(const MzResult *result, double *buf, uintptr_t len);

/**
 * Post-tax income per group, million Rp.
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
MzStatus mz_result_post_tax_income(const MzResult *result, double *buf, uintptr_t len);

/**
 * Relative decline per group (fraction of baseline income).
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
MzStatus mz_result_relative_decline(const MzResult *result, double *buf, uintptr_t len);

/**
 * Share of the total decline per group (fraction).
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
MzStatus mz_result_contribution_share(const MzResult *result, double *buf, uintptr_t len);

/**
 * Group identifier at `index`; the pointer stays valid while the handle
 * lives.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
MzStatus mz_result_group_id(const MzResult *result, uintptr_t index, const char **out);

/**
 * Gross tax revenue, million Rp.
 *
 * # Safety
 * `out` must be a valid pointer to a writable double.
 */
MzStatus mz_result_tax_revenue(const MzResult *result, double *out);

/**
 * Sum of all group income declines, million Rp.
 *
 * # Safety
 * `out` must be a valid pointer to a writable double.
 */
MzStatus mz_result_total_decline(const MzResult *result, double *out);

/**
 * Releases a result handle. Passing null is a no-op.
 *
 * # Safety
 * `result` must come from [`mz_run`] and not be freed twice.
 */
void mz_result_free(MzResult *result);

/**
 * Trapezoidal Gini of a grouped distribution. `shares` are population
 * shares summing to 1, `incomes` group totals, both of length `len`.
 *
 * # Safety
 * `shares` and `incomes` must point to `len` readable doubles and `out`
 * to a writable double.
 */
MzStatus mz_gini(const double *shares, const double *incomes, uintptr_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIYAZAWA_H */
