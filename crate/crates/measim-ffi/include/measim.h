#ifndef MEASIM_H
#define MEASIM_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Values mirror the CLI exit codes.
 */
typedef enum MeasimStatus {
  MEASIM_STATUS_OK = 0,
  MEASIM_STATUS_PARSE_ERROR = 1,
  MEASIM_STATUS_VERIFICATION_FAILURE = 2,
  MEASIM_STATUS_SIZE_LIMIT = 3,
  MEASIM_STATUS_INVALID_ARGUMENT = 4,
  MEASIM_STATUS_INTERNAL_ERROR = 5,
} MeasimStatus;

/**
 * Opaque handle to a loaded problem file.
 */
typedef struct MeasimProblem MeasimProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *measim_version(void);

/**
 * Last error detail for the calling thread, or NULL. Free with
 * `measim_string_free`.
 */
char *measim_last_error_message(void);

/**
 * Free a string returned by this library. NULL is accepted.
 *
 * # Safety
 * `s` must have been returned by a `measim_*` function and not freed before.
 */
void measim_string_free(char *s);

/**
 * Parse a problem document (the CLI's JSON schema) into a handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum MeasimStatus measim_problem_from_json(const char *json, struct MeasimProblem **out);

/**
 * Destroy a problem handle. NULL is accepted.
 *
 * # Safety
 * `p` must have come from `measim_problem_from_json` and not be freed twice.
 */
void measim_problem_free(struct MeasimProblem *p);

/**
 * Compute a rate region; `theorem` is one of the CLI names (`mc`,
 * `mc-instr`, `nonfeedback`, `cdcqsi`, `mcqsi`, `mcqsi-nonfeedback`,
 * `uncertainty`). The JSON report is returned through `out_json`.
 *
 * # Safety
 * `p` must be a live handle; `theorem` NUL-terminated; `out_json` valid.
 */
enum MeasimStatus measim_rates_json(const struct MeasimProblem *p,
                                    const char *theorem,
                                    char **out_json);

/**
 * Simulation parameters as JSON, mirroring the CLI flags:
 * `{"protocol": "mc", "n": 3, "l_size": 64, "m_size": 4, "rate": 1.5,
 *   "hash_rate": 1.0, "delta": 0.3, "eps": 0.3, "trials": 50, "seed": 7}`.
 * Missing numeric fields take the CLI defaults.
 *
 * # Safety
 * `p` must be a live handle; `params_json` NUL-terminated; `out_json` valid.
 */
enum MeasimStatus measim_simulate_json(const struct MeasimProblem *p,
                                       const char *params_json,
                                       char **out_json);

/**
 * Run a lemma verification suite (`gentle`, `gentle-ensemble`, `trace-ineq`,
 * `sen`, `chernoff`, `entropy-close`, `equivalence`). Returns
 * `VerificationFailure` when violations were found; the report still lands
 * in `out_json`.
 *
 * # Safety
 * `suite` must be NUL-terminated and `out_json` a valid pointer.
 */
enum MeasimStatus measim_verify_json(const char *suite,
                                     uintptr_t instances,
                                     uint64_t seed,
                                     char **out_json);

/**
 * Von Neumann entropy in bits of a density matrix given as row-major
 * interleaved `re, im` doubles (`2 * dim * dim` values).
 *
 * # Safety
 * `entries` must point to `2 * dim * dim` readable doubles; `out_bits` must
 * be a valid pointer.
 */
enum MeasimStatus measim_von_neumann_entropy(const double *entries,
                                             uintptr_t dim,
                                             double *out_bits);

/**
 * Trace distance between two density matrices in the same layout as
 * `measim_von_neumann_entropy`.
 *
 * # Safety
 * `a` and `b` must each point to `2 * dim * dim` readable doubles; `out`
 * must be a valid pointer.
 */
enum MeasimStatus measim_trace_distance(const double *a,
                                        const double *b,
                                        uintptr_t dim,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEASIM_H */
