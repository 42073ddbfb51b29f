#ifndef SINGREG_H
#define SINGREG_H

/* Generated from the singreg-ffi crate by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible entry point.
typedef enum {
  // The call succeeded.
  SINGREG_OK = 0,
  // An argument value is outside what the call accepts (e.g. non-finite).
  SINGREG_ERR_INVALID = 1,
  // The construction collapses identically for these inputs (n = 4).
  SINGREG_ERR_DEGENERATE = 2,
  // An iterative numeric procedure failed to reach its tolerance.
  SINGREG_ERR_CONVERGENCE = 3,
  // The input lies outside the domain of the construction (x <= 0, n < 4, ...).
  SINGREG_ERR_DOMAIN = 4,
  // A required pointer argument is null.
  SINGREG_ERR_NULL = 5,
  // A string argument is not valid UTF-8.
  SINGREG_ERR_UTF8 = 6,
  // The material id is not in the built-in registry.
  SINGREG_ERR_UNKNOWN_MATERIAL = 7,
  // An I/O operation failed.
  SINGREG_ERR_IO = 8,
  // The library panicked internally; treat the handle as poisoned.
  SINGREG_ERR_INTERNAL = 9,
} singreg_status;

// Opaque handle to a built correlation model.
typedef struct SingregModel SingregModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build a Lennard-Jones model with coupling `lambda`.
//
// On success writes a handle to `*out`; release it with
// `singreg_model_free`.
singreg_status singreg_model_lj(double lambda, SingregModel **out);

// Build a pure power-law model `v = x^-n` with coupling `lambda`.
//
// Requires n > 4; n = 4 is degenerate and 2 < n < 4 is outside the domain
// of the single-factor construction.
singreg_status singreg_model_power(double n, double lambda, SingregModel **out);

// Build the model of a built-in material (see `singreg_material_id`).
singreg_status singreg_model_for_material(const char *id, SingregModel **out);

// Release a model handle. A null handle is a no-op.
void singreg_model_free(SingregModel *model);

// Evaluate the correlation function g at `x > 0` into `*out`.
singreg_status singreg_g(const SingregModel *model, double x, double *out);

// Evaluate the regularized potential g*v at `x > 0` into `*out`.
singreg_status singreg_phi_reg(const SingregModel *model, double x, double *out);

// Evaluate g on `len` abscissae from `xs` into `out`.
//
// With `len == 0` both array pointers may be null. On a non-OK return the
// prefix of `out` already written is unspecified.
singreg_status singreg_g_many(const SingregModel *model, const double *xs, size_t len, double *out);

// Read the model constants. Every output pointer may be null to skip that
// value.
singreg_status singreg_constants(const SingregModel *model,
                                 double *lambda,
                                 double *a,
                                 double *alpha,
                                 double *mu,
                                 double *s0);

// Number of built-in materials.
size_t singreg_material_count(void);

// Id of the built-in material at `index`, in sorted order, or null when
// the index is out of range. The string is static; do not free it.
const char *singreg_material_id(size_t index);

// Look up the coupling of a built-in material into `*out`.
singreg_status singreg_material_lambda(const char *id, double *out);

// Static description of a status code; never null.
const char *singreg_status_message(singreg_status status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SINGREG_H */
