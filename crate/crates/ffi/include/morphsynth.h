#ifndef MORPHSYNTH_H
#define MORPHSYNTH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed or inconsistent input; see the last error message.
   */
  MS_STATUS_INVALID_INPUT = 3,
  /**
   * No selection fits the budget.
   */
  MS_STATUS_INFEASIBLE = 4,
  /**
   * A result does not fit the output type.
   */
  MS_STATUS_OVERFLOW = 5,
  /**
   * The library panicked; the handle arguments are still valid.
   */
  MS_STATUS_PANIC = 6,
} MsStatus;

typedef enum MsDominance {
  MS_DOMINANCE_BETTER = 0,
  MS_DOMINANCE_WORSE = 1,
  MS_DOMINANCE_EQUAL = 2,
  MS_DOMINANCE_INCOMPARABLE = 3,
} MsDominance;

/**
 * Opaque multiset estimate.
 */
typedef struct MsEstimate MsEstimate;

/**
 * Opaque morphological model.
 */
typedef struct MsModel MsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *ms_last_error_message(void);

/**
 * # Safety
 * `s` is null or a string returned by this library and not yet freed.
 */
void ms_string_free(char *s);

/**
 * Number of multisets of `eta` elements over `l` levels.
 *
 * # Safety
 * `out` is valid for a write.
 */
enum MsStatus ms_multiset_coefficient(size_t l, size_t eta, uint64_t *out);

/**
 * Parses `"(2,1,0,0)"` into a new handle.
 *
 * # Safety
 * `s` is a NUL-terminated string; `out` is valid for a write.
 */
enum MsStatus ms_estimate_parse(const char *s, struct MsEstimate **out);

/**
 * # Safety
 * `e` is null or a handle from [`ms_estimate_parse`] not yet freed.
 */
void ms_estimate_free(struct MsEstimate *e);

/**
 * # Safety
 * `e` is a live handle; `out` is valid for a write.
 */
enum MsStatus ms_estimate_to_string(const struct MsEstimate *e, char **out);

/**
 * Poset relation of `a` to `b`.
 *
 * # Safety
 * `a`, `b` are live handles; `out` is valid for a write.
 */
enum MsStatus ms_estimate_dominates(const struct MsEstimate *a,
                                    const struct MsEstimate *b,
                                    enum MsDominance *out);

/**
 * Improvement (`minus`) and degradation (`plus`) steps turning `a` into `b`.
 *
 * # Safety
 * `a`, `b` are live handles; both out-pointers are valid for writes.
 */
enum MsStatus ms_estimate_proximity(const struct MsEstimate *a,
                                    const struct MsEstimate *b,
                                    uint64_t *minus,
                                    uint64_t *plus);

/**
 * Medians of `";"`-separated estimates as `{"generalized": .., "set": ..}`.
 *
 * # Safety
 * `estimates` is a NUL-terminated string; `out` is valid for a write.
 */
enum MsStatus ms_median_json(const char *estimates, char **out);

/**
 * # Safety
 * `doc` is a NUL-terminated JSON model; `out` is valid for a write.
 */
enum MsStatus ms_model_parse(const char *doc, struct MsModel **out);

/**
 * The embedded on-board telemetry model.
 *
 * # Safety
 * `out` is valid for a write.
 */
enum MsStatus ms_model_builtin(struct MsModel **out);

/**
 * # Safety
 * `m` is null or a model handle not yet freed.
 */
void ms_model_free(struct MsModel *m);

/**
 * # Safety
 * `m` is a live handle; `out` is valid for a write.
 */
enum MsStatus ms_model_design_space_size(const struct MsModel *m, uint64_t *out);

/**
 * Pareto fronts as a JSON array: every composite when `component` is null,
 * otherwise just that composite.
 *
 * # Safety
 * `m` is a live handle; `component` is null or NUL-terminated; `out` is
 * valid for a write.
 */
enum MsStatus ms_synthesize_json(const struct MsModel *m, const char *component, char **out);

/**
 * Solves a choice instance `{scale, budget, groups}`; JSON array of results.
 *
 * # Safety
 * `instance` is NUL-terminated; `out` is valid for a write.
 */
enum MsStatus ms_choice_solve_json(const char *instance, char **out);

/**
 * Bottlenecks and improvement plan. `actions` null selects the bundled
 * actions; `budget` null uses the document budget.
 *
 * # Safety
 * `m` is a live handle; `actions` is null or NUL-terminated; `budget` is null
 * or readable; `out` is valid for a write.
 */
enum MsStatus ms_improve_json(const struct MsModel *m,
                              const char *actions,
                              const double *budget,
                              char **out);

/**
 * Supersolution, kernel and kernel extension for
 * `{solutions, candidates, budget}`. `doc` null selects the bundled data;
 * `budget` null uses the document budget.
 *
 * # Safety
 * `doc` is null or NUL-terminated; `budget` is null or readable; `out` is
 * valid for a write.
 */
enum MsStatus ms_aggregate_json(const char *doc, const double *budget, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MORPHSYNTH_H */
