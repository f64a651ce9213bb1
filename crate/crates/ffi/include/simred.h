#ifndef SIMRED_H
#define SIMRED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SimredStatus {
  SimredStatus_Ok = 0,
  SimredStatus_NullPointer = 1,
  SimredStatus_InvalidUtf8 = 2,
  SimredStatus_InvalidParams = 3,
  SimredStatus_DomainViolation = 4,
  SimredStatus_NonPositive = 5,
  SimredStatus_UnknownEntry = 6,
  SimredStatus_ParseError = 7,
  SimredStatus_NumericalFailure = 8,
  SimredStatus_IndexOutOfRange = 9,
  SimredStatus_Panic = 10,
} SimredStatus;

/**
 * Opaque handle to a verified catalog.
 */
typedef struct SimredCatalog SimredCatalog;

/**
 * `n = n_num / n_den`, `C`, `λ`.
 */
typedef struct SimredParams {
  int64_t n_num;
  int64_t n_den;
  double c;
  double lambda;
} SimredParams;

/**
 * `u` with `u_x`, `u_xx` and `u_t`.
 */
typedef struct SimredJet {
  double v;
  double vx;
  double vxx;
  double vt;
} SimredJet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *simred_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library that was not yet freed.
 */
void simred_string_free(char *s);

/**
 * PDE residual `u_t − (u^n)_xx − C/(x+λ)(u^n)_x` for a jet at `x`.
 *
 * # Safety
 * `params` and `jet` must be readable, `out` writable.
 */
enum SimredStatus simred_pde_residual(const struct SimredParams *params,
                                      double x,
                                      const struct SimredJet *jet,
                                      double *out);

/**
 * Builds the catalog and verifies every solution preset against the PDE.
 * Returns null on failure.
 */
struct SimredCatalog *simred_catalog_new(void);

/**
 * # Safety
 * `c` must be null or a catalog from [`simred_catalog_new`] not yet freed.
 */
void simred_catalog_free(struct SimredCatalog *c);

/**
 * Number of entries.
 *
 * # Safety
 * `c` must be a live catalog and `out` writable.
 */
enum SimredStatus simred_catalog_len(const struct SimredCatalog *c, uintptr_t *out);

/**
 * Id of entry `index` in id order, as a new string.
 *
 * # Safety
 * `c` must be a live catalog and `out` writable.
 */
enum SimredStatus simred_catalog_entry_id(const struct SimredCatalog *c,
                                          uintptr_t index,
                                          char **out);

/**
 * JSON listing of the entries of `kind` (null for all), as a new string.
 *
 * # Safety
 * `c` must be a live catalog, `kind` null or a C string, `out` writable.
 */
enum SimredStatus simred_catalog_json(const struct SimredCatalog *c, const char *kind, char **out);

/**
 * Value and derivatives of solution `id` (or `id@preset`) at `(x, t)`.
 *
 * # Safety
 * `c` must be a live catalog, `id` a C string, `out` writable.
 */
enum SimredStatus simred_solution_eval(const struct SimredCatalog *c,
                                       const char *id,
                                       double x,
                                       double t,
                                       struct SimredJet *out);

/**
 * Residual scan of solution `id` on a `grid × grid` tensor grid over its domain.
 *
 * # Safety
 * `c` must be a live catalog, `id` a C string, the out-pointers writable.
 */
enum SimredStatus simred_verify_solution(const struct SimredCatalog *c,
                                         const char *id,
                                         double tol,
                                         uintptr_t grid,
                                         double *max_residual,
                                         bool *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMRED_H */
