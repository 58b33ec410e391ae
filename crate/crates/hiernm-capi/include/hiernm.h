#ifndef HIERNM_H
#define HIERNM_H

/* Generated by cbindgen from hiernm-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum HiernmStatus {
  HIERNM_STATUS_OK = 0,
  HIERNM_STATUS_NULL_POINTER = 1,
  HIERNM_STATUS_INVALID_PARAMS = 2,
  // The operation needs a finite spectral width.
  HIERNM_STATUS_INFINITE_WIDTH = 3,
  // Degenerate (triple) poles at this parameter point.
  HIERNM_STATUS_DEGENERATE_POLES = 4,
  // Threshold bracket does not straddle the transition.
  HIERNM_STATUS_BRACKET = 5,
  HIERNM_STATUS_INTERNAL = 6,
} HiernmStatus;

// Opaque model-parameter handle.
typedef struct HiernmParams HiernmParams;

// Opaque propagator handle: evaluates G(t) for one parameter point.
typedef struct HiernmPropagator HiernmPropagator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a parameter handle. `lambda = INFINITY` selects the memoryless
// reservoir. On success writes the handle through `out` and returns `Ok`.
//
// # Safety
// `out` must be a valid pointer. The returned handle must be released with
// `hiernm_params_free`.
enum HiernmStatus hiernm_params_new(double kappa,
                                    double lambda,
                                    double gamma,
                                    struct HiernmParams **out);

// Release a parameter handle. Null is a no-op.
//
// # Safety
// `params` must have come from `hiernm_params_new` and not been freed.
void hiernm_params_free(struct HiernmParams *params);

// Build the propagator for a parameter point (Laplace inversion for finite
// width, the closed form for the memoryless sentinel).
//
// # Safety
// `params` and `out` must be valid pointers; the result must be released
// with `hiernm_propagator_free`.
enum HiernmStatus hiernm_propagator_new(const struct HiernmParams *params,
                                        struct HiernmPropagator **out);

// Release a propagator handle. Null is a no-op.
//
// # Safety
// `prop` must have come from `hiernm_propagator_new` and not been freed.
void hiernm_propagator_free(struct HiernmPropagator *prop);

// Evaluate G(t). Fails for t < 0 or on internal consistency violations.
//
// # Safety
// `prop` and `out` must be valid pointers.
enum HiernmStatus hiernm_propagator_eval(const struct HiernmPropagator *prop,
                                         double t,
                                         double *out);

// Non-Markovianity of a parameter point for the optimal initial pair.
// `horizon <= 0` selects the automatic envelope policy. Writes the measure
// through `out_nm` and the classification (1 = Markovian) through
// `out_markovian`; either may be null when not wanted.
//
// # Safety
// `params` must be a valid handle; non-null out pointers must be valid.
enum HiernmStatus hiernm_nm(const struct HiernmParams *params,
                            double horizon,
                            double *out_nm,
                            int *out_markovian);

// Non-Markovianity of the direct-coupling comparison model (qubit straight
// into the reservoir, kernel kappa^2 e^{-lambda |t-s|}).
//
// # Safety
// Non-null out pointers must be valid.
enum HiernmStatus hiernm_nm_direct(double kappa, double lambda, double *out_nm, int *out_markovian);

// Markovian/non-Markovian threshold coupling at the given spectral width
// (INFINITY for the memoryless reservoir), bisected to width `tol`
// (`tol <= 0` selects the default 1e-4 gamma).
//
// # Safety
// `out` must be a valid pointer.
enum HiernmStatus hiernm_threshold_kappa(double lambda, double gamma, double tol, double *out);

// Static description of a status code.
const char *hiernm_status_message(enum HiernmStatus status);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HIERNM_H */
