#ifndef CIRCUIT_PRIOR_H
#define CIRCUIT_PRIOR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum CpStatus {
  CP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CP_STATUS_NULL_POINTER = 1,
  /**
   * Malformed or out-of-range argument.
   */
  CP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Circuit text could not be parsed or validated.
   */
  CP_STATUS_PARSE = 3,
  /**
   * The requested size is beyond the enumeration budget.
   */
  CP_STATUS_BUDGET_EXCEEDED = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  CP_STATUS_INTERNAL = 5,
} CpStatus;

/**
 * A NAND circuit.
 */
typedef struct CpCircuit CpCircuit;

/**
 * Complexity oracle for one input count.
 */
typedef struct CpOracle CpOracle;

/**
 * Predictor summary over a full string.
 */
typedef struct CpTrace {
  /**
   * `I(x)`; meaningful only when `budget_exceeded` is false.
   */
  size_t complexity;
  size_t errors;
  size_t uncertain;
  bool budget_exceeded;
} CpTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *cp_last_error(void);

/**
 * Library version as a static string.
 */
const char *cp_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void cp_string_free(char *s);

/**
 * Builds the exact complexities of every function of `inputs` inputs up to
 * `budget` gates.
 *
 * # Safety
 * `out_oracle` must be valid for writes.
 */
enum CpStatus cp_oracle_new(uint8_t inputs, size_t budget, struct CpOracle **out_oracle);

/**
 * Releases an oracle. Null is ignored.
 *
 * # Safety
 * `oracle` must be null or a handle from [`cp_oracle_new`], not yet freed.
 */
void cp_oracle_free(struct CpOracle *oracle);

/**
 * Index complexity of a pattern over `0`, `1`, `*`, right-padded with `*`.
 *
 * On success `*exceeded` says whether the complexity is above the oracle's
 * budget; otherwise `*value` holds it and, when `out_witness` is not null,
 * `*out_witness` receives a minimum circuit to be freed by the caller.
 *
 * # Safety
 * Pointers must be valid; `pattern` must be nul-terminated.
 */
enum CpStatus cp_oracle_complexity(const struct CpOracle *oracle,
                                   const char *pattern,
                                   size_t *value,
                                   bool *exceeded,
                                   struct CpCircuit **out_witness);

/**
 * Prediction for the bit after `prefix`: bit 0 of `*set` stands for `0`,
 * bit 1 for `1`. `*capped` is set when both extensions exceed the budget.
 *
 * # Safety
 * Pointers must be valid; `prefix` must be nul-terminated.
 */
enum CpStatus cp_oracle_predict(const struct CpOracle *oracle,
                                const char *prefix,
                                uint8_t *set,
                                bool *capped);

/**
 * Runs the predictor over `string`, treating ties as uncertain.
 *
 * # Safety
 * Pointers must be valid; `string` must be nul-terminated.
 */
enum CpStatus cp_oracle_trace(const struct CpOracle *oracle,
                              const char *string,
                              struct CpTrace *out_trace);

/**
 * Parses the line format `inputs=L`, `k: NAND a b`, ..., `out=node`.
 *
 * # Safety
 * `text` must be nul-terminated and `out_circuit` valid for writes.
 */
enum CpStatus cp_circuit_parse(const char *text, struct CpCircuit **out_circuit);

/**
 * Releases a circuit. Null is ignored.
 *
 * # Safety
 * `circuit` must be null or a live handle from this library.
 */
void cp_circuit_free(struct CpCircuit *circuit);

/**
 * Number of gates, or 0 for a null handle.
 *
 * # Safety
 * `circuit` must be null or a live handle.
 */
size_t cp_circuit_size(const struct CpCircuit *circuit);

/**
 * Number of inputs, or 0 for a null handle.
 *
 * # Safety
 * `circuit` must be null or a live handle.
 */
uint8_t cp_circuit_inputs(const struct CpCircuit *circuit);

/**
 * The string the circuit computes, as `0`/`1` characters.
 *
 * # Safety
 * `circuit` must be a live handle and `out_string` valid for writes.
 */
enum CpStatus cp_circuit_compute_string(const struct CpCircuit *circuit, char **out_string);

/**
 * The circuit in the line format accepted by [`cp_circuit_parse`].
 *
 * # Safety
 * `circuit` must be a live handle and `out_text` valid for writes.
 */
enum CpStatus cp_circuit_to_text(const struct CpCircuit *circuit, char **out_text);

/**
 * Number of circuit classes with exactly `size` gates. Fails with
 * [`CpStatus::BudgetExceeded`] when there are more than `budget`.
 *
 * # Safety
 * `count` must be valid for writes.
 */
enum CpStatus cp_count_circuits(uint8_t inputs, size_t size, size_t budget, uint64_t *count);

/**
 * Lower and upper product bounds on the class count, as decimal strings.
 *
 * # Safety
 * `out_lower` and `out_upper` must be valid for writes.
 */
enum CpStatus cp_count_bounds(uint8_t inputs, size_t size, char **out_lower, char **out_upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCUIT_PRIOR_H */
