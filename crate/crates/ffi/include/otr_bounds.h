#ifndef OTR_BOUNDS_H
#define OTR_BOUNDS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OtrStatus {
  OTR_STATUS_OK = 0,
  OTR_STATUS_INVALID_INPUT = 1,
  OTR_STATUS_ZERO_CONTROL_VARIANCE = 2,
  OTR_STATUS_UNSUPPORTED_SPACE = 3,
  OTR_STATUS_INFEASIBLE = 4,
  OTR_STATUS_DOMAIN_ERROR = 5,
  OTR_STATUS_MISSING_MOMENTS = 6,
  OTR_STATUS_NUMERICAL = 7,
  OTR_STATUS_NULL_POINTER = 8,
  OTR_STATUS_INVALID_UTF8 = 9,
  OTR_STATUS_PANIC = 10,
} OtrStatus;

// Values accepted for the `space_kind` argument of [`otr_trial_new`].
typedef enum OtrSpaceKind {
  OTR_SPACE_KIND_UNBOUNDED = 0,
  OTR_SPACE_KIND_RANGE = 1,
  OTR_SPACE_KIND_FINITE = 2,
  OTR_SPACE_KIND_BINARY = 3,
} OtrSpaceKind;

// Values accepted for the `direction` argument of [`otr_trial_new`].
typedef enum OtrDirection {
  OTR_DIRECTION_HIGHER_BETTER = 0,
  OTR_DIRECTION_LOWER_BETTER = 1,
} OtrDirection;

// Values accepted for the `mean_se` argument of [`otr_ci_benefit_lp`].
typedef enum OtrMeanSe {
  OTR_MEAN_SE_STANDARD = 0,
  OTR_MEAN_SE_AS_PRINTED = 1,
} OtrMeanSe;

// Opaque trial handle.
typedef struct OtrTrial OtrTrial;

typedef struct OtrArm {
  uint64_t n;
  double mean;
  double variance;
} OtrArm;

typedef struct OtrInterval {
  double lower;
  double upper;
} OtrInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build a trial from arm summaries.
//
// `space_kind` is an [`OtrSpaceKind`]; `values`/`len` are read for finite
// supports and `min`/`max` for ranges. `direction` is an [`OtrDirection`].
// Free the result with [`otr_trial_free`].
//
// # Safety
// Pointers must be null or valid; `values` must point to `len` doubles.
enum OtrStatus otr_trial_new(const struct OtrArm *control,
                             const struct OtrArm *treatment,
                             int space_kind,
                             const double *values,
                             size_t len,
                             double min,
                             double max,
                             int direction,
                             struct OtrTrial **out);

// Build a trial from a study document (JSON). Stratified documents yield
// their marginal trial.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` must be writable.
enum OtrStatus otr_trial_from_json(const char *json, struct OtrTrial **out);

// # Safety
// `trial` must come from this library and not have been freed.
void otr_trial_free(struct OtrTrial *trial);

// var(Y¹ − Y⁰) bounds from standard deviations alone.
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_het_bounds_general(const struct OtrTrial *trial, struct OtrInterval *out);

// var(Y¹ − Y⁰) bounds using the outcome range.
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_het_bounds_bounded(const struct OtrTrial *trial, struct OtrInterval *out);

// Sharp benefit bounds by linear programming.
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_benefit_bounds_lp(const struct OtrTrial *trial,
                                     double relax_eps,
                                     struct OtrInterval *out);

// Closed-form benefit bounds for binary outcomes.
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_benefit_bounds_binary(const struct OtrTrial *trial, struct OtrInterval *out);

// Closed-form upper bound on the benefit.
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_benefit_upper_closed(const struct OtrTrial *trial, double *out);

// Two-sided 1 − α interval for the var(Y¹ − Y⁰) bounds.
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_ci_heterogeneity(const struct OtrTrial *trial,
                                    double alpha,
                                    struct OtrInterval *out);

// One-sided 1 − α upper confidence bound for the closed-form benefit bound.
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_ucb_benefit_closed(const struct OtrTrial *trial, double alpha, double *out);

// 1 − α confidence interval for the LP benefit bounds. `mean_se` is an [`OtrMeanSe`].
//
// # Safety
// `trial` must be a live handle; `out` must be writable.
enum OtrStatus otr_ci_benefit_lp(const struct OtrTrial *trial,
                                 double alpha,
                                 int mean_se,
                                 struct OtrInterval *out);

// Inverse standard normal CDF.
//
// # Safety
// `out` must be writable.
enum OtrStatus otr_normal_quantile(double p, double *out);

// Run a command-line analysis (`heterogeneity`, `benefit`, `benefit-lp`,
// `ci` or `validate`) on a study document and return the machine report as
// JSON. Analysis failures are reported inside the document (its `exit_code`
// and `diagnostics`), so the status is `OTR_STATUS_OK` whenever a report
// was produced. Free the string with [`otr_string_free`].
//
// # Safety
// `command` and `json` must be valid NUL-terminated strings; `out` must be writable.
enum OtrStatus otr_run_json(const char *command, const char *json, char **out);

// # Safety
// `s` must come from [`otr_run_json`] and not have been freed.
void otr_string_free(char *s);

// Message for the last failed call on this thread, or NULL after a success.
// Valid until the next call into this library on the same thread.
const char *otr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *otr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OTR_BOUNDS_H */
