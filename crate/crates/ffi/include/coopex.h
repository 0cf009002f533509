#ifndef COOPEX_H
#define COOPEX_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CoopexStatus {
  COOPEX_STATUS_OK = 0,
  COOPEX_STATUS_NULL_ARGUMENT = 1,
  COOPEX_STATUS_INVALID_ARGUMENT = 2,
  COOPEX_STATUS_PARSE_ERROR = 3,
  COOPEX_STATUS_FIELD_TOO_SMALL = 4,
  COOPEX_STATUS_INFEASIBLE = 5,
  COOPEX_STATUS_BUDGET_EXCEEDED = 6,
  COOPEX_STATUS_CAPACITY_EXCEEDED = 7,
  COOPEX_STATUS_INTERNAL = 99,
} CoopexStatus;

/**
 * Opaque problem instance.
 */
typedef struct CoopexInstance CoopexInstance;

/**
 * Opaque broadcast schedule.
 */
typedef struct CoopexSchedule CoopexSchedule;

/**
 * Bounds on the optimal number of broadcasts.
 */
typedef struct CoopexBounds {
  size_t lower;
  size_t upper_leader;
  size_t ie_guarantee;
  size_t trivial;
  /**
   * 1-based.
   */
  size_t best_leader;
} CoopexBounds;

/**
 * Outcome of replaying a schedule.
 */
typedef struct CoopexVerifyReport {
  bool all_satisfied;
  bool legal;
  /**
   * Number of clients that cannot decode everything.
   */
  size_t unsatisfied_clients;
} CoopexVerifyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *coopex_version(void);

/**
 * Message describing the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next library call on this thread.
 */
const char *coopex_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 *
 * `s` must be NULL or a pointer returned by a `*_to_json` function that has
 * not been freed yet.
 */
void coopex_string_free(char *s);

/**
 * Parses an instance document.
 *
 * # Safety
 *
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum CoopexStatus coopex_instance_from_json(const char *json, struct CoopexInstance **out);

/**
 * Draws a random instance with membership density `rho`.
 *
 * # Safety
 *
 * `out` must be a writable pointer.
 */
enum CoopexStatus coopex_instance_random(size_t n,
                                         size_t k,
                                         double rho,
                                         uint64_t seed,
                                         struct CoopexInstance **out);

/**
 * # Safety
 *
 * `inst` must be NULL or a live handle from this library.
 */
void coopex_instance_free(struct CoopexInstance *inst);

/**
 * Packet count, or 0 for a NULL handle.
 *
 * # Safety
 *
 * `inst` must be NULL or a live handle.
 */
size_t coopex_instance_n(const struct CoopexInstance *inst);

/**
 * Client count, or 0 for a NULL handle.
 *
 * # Safety
 *
 * `inst` must be NULL or a live handle.
 */
size_t coopex_instance_k(const struct CoopexInstance *inst);

/**
 * Canonical JSON document; free with `coopex_string_free`. NULL on a NULL handle.
 *
 * # Safety
 *
 * `inst` must be NULL or a live handle.
 */
char *coopex_instance_to_json(const struct CoopexInstance *inst);

/**
 * # Safety
 *
 * `inst` must be a live handle and `out` writable.
 */
enum CoopexStatus coopex_bounds(const struct CoopexInstance *inst, struct CoopexBounds *out);

/**
 * Runs the greedy max-dimension scheme over GF(q); `q = 0` picks the
 * smallest prime at least k.
 *
 * # Safety
 *
 * `inst` must be a live handle and `out` writable.
 */
enum CoopexStatus coopex_run_ie(const struct CoopexInstance *inst,
                                uint32_t q,
                                struct CoopexSchedule **out);

/**
 * Runs the two-phase leader scheme; `leader = 0` picks the cheapest leader,
 * otherwise it is a 1-based client index.
 *
 * # Safety
 *
 * `inst` must be a live handle and `out` writable.
 */
enum CoopexStatus coopex_run_leader(const struct CoopexInstance *inst,
                                    uint32_t q,
                                    size_t leader,
                                    struct CoopexSchedule **out);

/**
 * Coded schedule for a 1-based client ordering of length `len`.
 *
 * # Safety
 *
 * `perm` must point to `len` readable entries; `inst` live; `out` writable.
 */
enum CoopexStatus coopex_random_schedule(const struct CoopexInstance *inst,
                                         const size_t *perm,
                                         size_t len,
                                         uint32_t q,
                                         struct CoopexSchedule **out);

/**
 * Transmission count of the random-ordering scheme for one ordering.
 *
 * # Safety
 *
 * As for `coopex_random_schedule`; `total` must be writable.
 */
enum CoopexStatus coopex_random_tau(const struct CoopexInstance *inst,
                                    const size_t *perm,
                                    size_t len,
                                    size_t *total);

/**
 * Exact average over all orderings as the fraction `numer / denom`.
 *
 * # Safety
 *
 * `inst` must be live; `numer` and `denom` writable.
 */
enum CoopexStatus coopex_random_average_exact(const struct CoopexInstance *inst,
                                              uint64_t *numer,
                                              uint64_t *denom);

/**
 * Exact optimum over GF(q) (`q = 0` for the default field).
 *
 * On success writes the optimum to `tau`. On `BudgetExceeded` writes the
 * known bracket to `lower` and `upper` instead. Either bracket pointer may
 * be NULL.
 *
 * # Safety
 *
 * `inst` must be live; `tau` writable; `lower`/`upper` NULL or writable.
 */
enum CoopexStatus coopex_optimal_tau(const struct CoopexInstance *inst,
                                     uint32_t q,
                                     uint64_t budget,
                                     size_t *tau,
                                     size_t *lower,
                                     size_t *upper);

/**
 * Parses a schedule document.
 *
 * # Safety
 *
 * `json` must be NUL-terminated; `out` writable.
 */
enum CoopexStatus coopex_schedule_from_json(const char *json, struct CoopexSchedule **out);

/**
 * Schedule JSON document; free with `coopex_string_free`.
 *
 * # Safety
 *
 * `sched` must be NULL or a live handle.
 */
char *coopex_schedule_to_json(const struct CoopexSchedule *sched);

/**
 * Number of broadcasts, or 0 for a NULL handle.
 *
 * # Safety
 *
 * `sched` must be NULL or a live handle.
 */
size_t coopex_schedule_total(const struct CoopexSchedule *sched);

/**
 * # Safety
 *
 * `sched` must be NULL or a live handle from this library.
 */
void coopex_schedule_free(struct CoopexSchedule *sched);

/**
 * Replays `sched` against `inst`.
 *
 * # Safety
 *
 * Both handles must be live; `out` writable.
 */
enum CoopexStatus coopex_verify(const struct CoopexInstance *inst,
                                const struct CoopexSchedule *sched,
                                struct CoopexVerifyReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COOPEX_H */
