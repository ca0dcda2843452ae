#ifndef ROBSCHED_H
#define ROBSCHED_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum RsCode {
  RS_CODE_OK = 0,
  RS_CODE_NULL_POINTER = 1,
  RS_CODE_INVALID_ARGUMENT = 2,
  RS_CODE_INVALID_INSTANCE = 3,
  RS_CODE_INFEASIBLE = 4,
  RS_CODE_IO = 5,
  RS_CODE_FORMAT = 6,
  RS_CODE_BACKEND = 7,
  RS_CODE_CAP_EXCEEDED = 8,
  RS_CODE_NO_INCUMBENT = 9,
  RS_CODE_PANIC = 10,
} RsCode;

// Termination status of a report.
typedef enum RsStatus {
  RS_STATUS_OPTIMAL = 0,
  RS_STATUS_TIME_LIMIT = 1,
  RS_STATUS_INFEASIBLE = 2,
  RS_STATUS_ERROR = 3,
} RsStatus;

// Solution methods.
typedef enum RsMethod {
  RS_METHOD_NOMINAL_LB = 0,
  RS_METHOD_NOMINAL_UB = 1,
  RS_METHOD_COMPACT = 2,
  RS_METHOD_COMPACT_STR = 3,
  RS_METHOD_ITERATIVE = 4,
  RS_METHOD_ITERATIVE_STR = 5,
} RsMethod;

// Opaque instance handle.
typedef struct RsInstance RsInstance;

// Opaque solve report handle.
typedef struct RsReport RsReport;

// Solver controls. A non-positive `time_limit` or `rel_gap` selects the default.
typedef struct RsSolveParams {
  double time_limit;
  double rel_gap;
  bool warm_start;
  uint32_t enrich_k;
  uint32_t threads;
} RsSolveParams;

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `rs_*` call on the same thread.
const char *rs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *rs_version(void);

// Reads an instance file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum RsCode rs_instance_load(const char *path, struct RsInstance **out);

// Parses an instance document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum RsCode rs_instance_from_json(const char *json, struct RsInstance **out);

// Builds an instance from row-major `n x horizon` cost arrays.
//
// # Safety
// `durations` must hold `n` values, `c_lower` and `c_hat` `n * horizon`
// values each, and `out` must be a valid pointer.
enum RsCode rs_instance_new(uintptr_t n,
                            uintptr_t horizon,
                            const uint32_t *durations,
                            const double *c_lower,
                            const double *c_hat,
                            struct RsInstance **out);

// Generates a random instance with the default parameters.
//
// # Safety
// `out` must be a valid pointer.
enum RsCode rs_instance_generate(uintptr_t n, uint64_t seed, struct RsInstance **out);

// Releases an instance; null is ignored.
//
// # Safety
// `inst` must come from an `rs_instance_*` constructor and not be used afterwards.
void rs_instance_free(struct RsInstance *inst);

// Number of activities, or 0 for null.
//
// # Safety
// `inst` must be null or a live handle.
uintptr_t rs_instance_n(const struct RsInstance *inst);

// Horizon length, or 0 for null.
//
// # Safety
// `inst` must be null or a live handle.
uintptr_t rs_instance_horizon(const struct RsInstance *inst);

// Default controls: solver defaults, no warm start, no enrichment, one thread.
struct RsSolveParams rs_solve_params_default(void);

// Solves `inst` with `method` (an `RsMethod` value) at budget `gamma`.
// `params` may be null.
//
// # Safety
// `inst` must be a live handle, `params` null or valid, `out` a valid pointer.
enum RsCode rs_solve(const struct RsInstance *inst,
                     int32_t method,
                     double gamma,
                     const struct RsSolveParams *params,
                     struct RsReport **out);

// Releases a report; null is ignored.
//
// # Safety
// `report` must come from `rs_solve` and not be used afterwards.
void rs_report_free(struct RsReport *report);

// Objective value, or NaN for null.
//
// # Safety
// `report` must be null or a live handle.
double rs_report_objective(const struct RsReport *report);

// Proven bound, or NaN for null.
//
// # Safety
// `report` must be null or a live handle.
double rs_report_bound(const struct RsReport *report);

// Termination status; `Error` for null.
//
// # Safety
// `report` must be null or a live handle.
enum RsStatus rs_report_status(const struct RsReport *report);

// Copies the processing order into `perm` (capacity `len`, at least `n`).
//
// # Safety
// `report` must be a live handle and `perm` valid for `len` writes.
enum RsCode rs_report_ordering(const struct RsReport *report, uintptr_t *perm, uintptr_t len);

// JSON rendering of the report (1-based labels); free with `rs_string_free`.
// Returns null on failure.
//
// # Safety
// `report` must be a live handle.
char *rs_report_to_json(const struct RsReport *report);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void rs_string_free(char *s);

// Cost of the order `perm` (length `len`, 0-based) under the nominal,
// continuous and discrete models. `out_disc` receives NaN when `gamma` is
// not an integer.
//
// # Safety
// `inst` must be a live handle, `perm` valid for `len` reads, and the
// output pointers valid.
enum RsCode rs_evaluate(const struct RsInstance *inst,
                        const uintptr_t *perm,
                        uintptr_t len,
                        double gamma,
                        const struct RsSolveParams *params,
                        double *out_lb,
                        double *out_cont,
                        double *out_disc);

#endif  /* ROBSCHED_H */
