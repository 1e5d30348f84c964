#ifndef LGP_H
#define LGP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LgpStatus {
  LGP_STATUS_OK = 0,
  LGP_STATUS_NULL_POINTER = 1,
  LGP_STATUS_INVALID_UTF8 = 2,
  LGP_STATUS_INVALID_INPUT = 3,
  LGP_STATUS_FIXTURE = 4,
  LGP_STATUS_RESOURCE_LIMIT = 5,
  LGP_STATUS_IO = 6,
  LGP_STATUS_PANIC = 7,
} LgpStatus;

/**
 * A finite abelian group given by invariant factors.
 */
typedef struct LgpGroup LgpGroup;

/**
 * A loaded module description.
 */
typedef struct LgpModule LgpModule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library from the same thread.
 */
const char *lgp_last_error(void);

/**
 * Library version as a static string.
 */
const char *lgp_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void lgp_string_free(char *s);

/**
 * Loads a module description file.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum LgpStatus lgp_module_load(const char *path, struct LgpModule **out);

/**
 * # Safety
 * `m` comes from [`lgp_module_load`] or is null.
 */
void lgp_module_free(struct LgpModule *m);

/**
 * # Safety
 * `m` is a live handle; `out` is writable.
 */
enum LgpStatus lgp_module_rank(const struct LgpModule *m, size_t *out);

/**
 * Number of good places up to `bound`.
 *
 * # Safety
 * `m` is a live handle; `out` is writable.
 */
enum LgpStatus lgp_module_good_place_count(const struct LgpModule *m, uint64_t bound, size_t *out);

/**
 * Group with the given invariant factors (each ≥ 2, each dividing the
 * next). `len = 0` gives the trivial group.
 *
 * # Safety
 * `invariants` points to `len` values; `out` is writable.
 */
enum LgpStatus lgp_group_new(const uint64_t *invariants, size_t len, struct LgpGroup **out);

/**
 * # Safety
 * `g` comes from [`lgp_group_new`] or is null.
 */
void lgp_group_free(struct LgpGroup *g);

/**
 * Order of the element with coordinates `coords` (reduced modulo the
 * invariant factors).
 *
 * # Safety
 * `g` is a live handle; `coords` points to `len` values; `out` is writable.
 */
enum LgpStatus lgp_group_element_order(const struct LgpGroup *g,
                                       const int64_t *coords,
                                       size_t len,
                                       uint64_t *out);

/**
 * Fixing-matrix outcome for `e` elements of `g` as JSON: either a
 * certificate or a method failure with its gcd. `pbar` holds the `e`
 * elements row by row.
 *
 * # Safety
 * `g` is a live handle; `pbar` points to `e · rank(g)` values; `out_json`
 * is writable.
 */
enum LgpStatus lgp_fixing_matrix_json(const struct LgpGroup *g,
                                      const int64_t *pbar,
                                      size_t e,
                                      uint64_t place,
                                      char **out_json);

/**
 * Exact decision of whether `pbar` lies in its own trace-zero lattice
 * inside `g`; writes 1 or 0.
 *
 * # Safety
 * As for [`lgp_fixing_matrix_json`]; `out` is writable.
 */
enum LgpStatus lgp_local_membership(const struct LgpGroup *g,
                                    const int64_t *pbar,
                                    size_t e,
                                    int32_t *out);

/**
 * Runs a subcommand (`counterexample`, `dynamics`, `scan-orders` or
 * `axioms`) on a module file and returns the report as JSON. Zero bounds
 * fall back to the fixture's values. `exit_code` receives 0 or 1 as the
 * command-line tool would return.
 *
 * # Safety
 * String arguments are NUL-terminated; out pointers are writable.
 */
enum LgpStatus lgp_run_report(const char *command,
                              const char *fixture,
                              uint64_t place_bound,
                              uint64_t step_bound,
                              uint64_t seed,
                              char **out_json,
                              int32_t *exit_code);

/**
 * Rechecks a JSON report; writes the number of problems found. When
 * there are any, the first one is readable through [`lgp_last_error`].
 *
 * # Safety
 * `json` is NUL-terminated; `problems` is writable.
 */
enum LgpStatus lgp_verify_report(const char *json, size_t *problems);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LGP_H */
