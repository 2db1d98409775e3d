#ifndef DEADLINE_BCAST_H
#define DEADLINE_BCAST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every fallible call.
typedef enum DbcStatus {
  DBC_STATUS_OK = 0,
  DBC_STATUS_NULL_POINTER = 1,
  DBC_STATUS_INVALID_CONFIG = 2,
  DBC_STATUS_GUARD = 3,
  DBC_STATUS_VALIDATION_FAILED = 4,
  DBC_STATUS_PANIC = 5,
} DbcStatus;

typedef enum DbcPolicy {
  DBC_POLICY_GREEDY_FULL = 0,
  DBC_POLICY_CURRENT_CSI = 1,
  DBC_POLICY_PAST_CSI = 2,
} DbcPolicy;

// Erasure probabilities of the four joint reception states.
typedef struct DbcChannel DbcChannel;

// Residual outage table for equal deadlines.
typedef struct DbcCostTable DbcCostTable;

// Result of running one policy on one pattern.
typedef struct DbcOutcome DbcOutcome;

// Outcome of a rate search; see `dbc_rate_solve`.
typedef struct DbcRateSolution {
  double lambda1;
  double lambda2;
  double pout;
  // No positive rate meets the target; the rates are zero.
  bool degenerate;
  // Whether `next_lambda2` and `next_pout` are set.
  bool has_next;
  double next_lambda2;
  double next_pout;
} DbcRateSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *dbc_version(void);

// Message for the last failed call on this thread, empty after a success.
// Valid until the next call into the library from the same thread.
const char *dbc_last_error_message(void);

// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum DbcStatus dbc_channel_new(double eps00,
                               double eps01,
                               double eps10,
                               double eps11,
                               struct DbcChannel **out);

// Writes the normalized probabilities `eps00, eps01, eps10, eps11`.
//
// # Safety
// `channel` must come from `dbc_channel_new`; `out` must hold four doubles.
enum DbcStatus dbc_channel_probs(const struct DbcChannel *channel, double *out);

// # Safety
// `channel` must come from `dbc_channel_new` or be null.
void dbc_channel_free(struct DbcChannel *channel);

// Exact deadline outage of the full-knowledge scheduler.
//
// # Safety
// `channel` must be a live handle and `out` writable.
enum DbcStatus dbc_exact_outage(const struct DbcChannel *channel,
                                double lambda1,
                                double lambda2,
                                uint32_t t1,
                                uint32_t t2,
                                double *out);

// Outage by enumerating every erasure pattern of the frame.
//
// # Safety
// `channel` must be a live handle and `out` writable.
enum DbcStatus dbc_brute_force_outage(const struct DbcChannel *channel,
                                      double lambda1,
                                      double lambda2,
                                      uint32_t t1,
                                      uint32_t t2,
                                      double *out);

// Simulated outage of `policy`. Results depend only on the arguments, not
// on the number of worker threads.
//
// # Safety
// `channel` must be a live handle; `value` and `stderr_out` writable.
enum DbcStatus dbc_monte_carlo_outage(const struct DbcChannel *channel,
                                      enum DbcPolicy policy,
                                      double lambda1,
                                      double lambda2,
                                      uint32_t t1,
                                      uint32_t t2,
                                      uint64_t trials,
                                      uint64_t seed,
                                      double *value,
                                      double *stderr_out);

// Whether `(lambda1, lambda2)` lies in the cut-set region of a pattern split
// into blocks of `t1` slots.
//
// # Safety
// `symbols` must point to `len` bytes; `out` writable.
enum DbcStatus dbc_is_feasible(const uint8_t *symbols,
                               size_t len,
                               uint32_t t1,
                               double lambda1,
                               double lambda2,
                               bool *out);

// # Safety
// `channel` must be a live handle and `out` writable.
enum DbcStatus dbc_cost_table_new(const struct DbcChannel *channel,
                                  uint32_t tmax,
                                  uint32_t l1max,
                                  uint32_t l2max,
                                  struct DbcCostTable **out);

// Outage of `l1`, `l2` packets in `t` remaining slots.
//
// # Safety
// `table` must be a live handle and `out` writable.
enum DbcStatus dbc_cost_table_get(const struct DbcCostTable *table,
                                  uint32_t l1,
                                  uint32_t l2,
                                  uint32_t t,
                                  double *out);

// # Safety
// `table` must come from `dbc_cost_table_new` or be null.
void dbc_cost_table_free(struct DbcCostTable *table);

// Runs `policy` on a pattern. `channel` may be null for the greedy policy.
//
// # Safety
// `symbols` must point to `len` bytes; `channel` null or live; `out`
// writable.
enum DbcStatus dbc_schedule_run(enum DbcPolicy policy,
                                const uint8_t *symbols,
                                size_t len,
                                double lambda1,
                                double lambda2,
                                uint32_t t1,
                                uint32_t t2,
                                const struct DbcChannel *channel,
                                struct DbcOutcome **out);

// # Safety
// `outcome` must be a live handle and `out` writable.
enum DbcStatus dbc_outcome_met_deadlines(const struct DbcOutcome *outcome, bool *out);

// Number of slots in the schedule.
//
// # Safety
// `outcome` must be a live handle and `out` writable.
enum DbcStatus dbc_outcome_len(const struct DbcOutcome *outcome, size_t *out);

// Data delivered to each user in slot `slot` (0-based).
//
// # Safety
// `outcome` must be a live handle; `amt1` and `amt2` writable.
enum DbcStatus dbc_outcome_allocation(const struct DbcOutcome *outcome,
                                      size_t slot,
                                      double *amt1,
                                      double *amt2);

// Per-slot trace, one line per slot. Release with `dbc_string_free`.
//
// # Safety
// `outcome` must be a live handle and `out` writable.
enum DbcStatus dbc_outcome_trace(const struct DbcOutcome *outcome, char **out);

// # Safety
// `outcome` must come from `dbc_schedule_run` or be null.
void dbc_outcome_free(struct DbcOutcome *outcome);

// # Safety
// `s` must come from this library or be null.
void dbc_string_free(char *s);

// Largest rates on the ray `lambda1 = m * lambda2` whose outage is at most
// `p`.
//
// # Safety
// `channel` must be a live handle and `out` writable.
enum DbcStatus dbc_rate_solve(const struct DbcChannel *channel,
                              uint32_t t1,
                              uint32_t t2,
                              double p,
                              double m,
                              struct DbcRateSolution *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEADLINE_BCAST_H */
