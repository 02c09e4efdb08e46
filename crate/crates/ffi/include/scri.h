#ifndef SCRI_H
#define SCRI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScriStatus {
  SCRI_STATUS_OK = 0,
  SCRI_STATUS_DOMAIN = 1,
  SCRI_STATUS_RANGE = 2,
  SCRI_STATUS_PRECISION = 3,
  SCRI_STATUS_CONFIG = 4,
  SCRI_STATUS_UNSUPPORTED = 5,
  SCRI_STATUS_SOLVE = 6,
  SCRI_STATUS_RESOURCE = 7,
  SCRI_STATUS_UNDEFINED_METRIC = 8,
  SCRI_STATUS_IO = 9,
  SCRI_STATUS_NULL_POINTER = 10,
  SCRI_STATUS_PANIC = 11,
} ScriStatus;

typedef enum ScriRoute {
  SCRI_ROUTE_CHARACTERISTIC = 0,
  SCRI_ROUTE_HYPERBOLIC = 1,
} ScriRoute;

/**
 * Far-field samples on an equispaced angular grid.
 */
typedef struct ScriFarField ScriFarField;

/**
 * A refractive-index model.
 */
typedef struct ScriMedium ScriMedium;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *scri_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length
 * in bytes, excluding the NUL; 0 when there is no error.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t scri_last_error_message(char *buf, size_t len);

/**
 * n ≡ 1.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum ScriStatus scri_medium_constant(struct ScriMedium **out);

/**
 * n² = 1 + κ²/r².
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum ScriStatus scri_medium_quadratic(double kappa, struct ScriMedium **out);

/**
 * n² = 1 + κ/r.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum ScriStatus scri_medium_linear(double kappa, struct ScriMedium **out);

/**
 * n² = 1 + κ²/(r² + d² + 2dr cosθ + r₀²).
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum ScriStatus scri_medium_anisotropic(double kappa, double d, double r0, struct ScriMedium **out);

/**
 * # Safety
 * `medium` must come from a `scri_medium_*` constructor and not be freed
 * twice. Null is ignored.
 */
void scri_medium_free(struct ScriMedium *medium);

/**
 * Numerical S_m from a single-mode two-step solve with `n_rho` radial
 * points, and the condition estimate of the incoming solve.
 *
 * # Safety
 * `medium` must be a live handle; outputs must be valid for writes.
 */
enum ScriStatus scri_scattering_coefficient(const struct ScriMedium *medium,
                                            enum ScriRoute route,
                                            double k,
                                            int32_t m,
                                            size_t n_rho,
                                            double *s_re,
                                            double *s_im,
                                            double *condition);

/**
 * Closed-form S_m for constant, short-range and long-range media.
 *
 * # Safety
 * `medium` must be a live handle; outputs must be valid for writes.
 */
enum ScriStatus scri_exact_scattering_coefficient(const struct ScriMedium *medium,
                                                  double k,
                                                  int32_t m,
                                                  double *s_re,
                                                  double *s_im);

/**
 * Scatters the von Mises beam e^{β cos(θ−θ₀)} and returns the far field.
 *
 * # Safety
 * `medium` must be a live handle; `out` must be valid for one pointer write.
 */
enum ScriStatus scri_scatter_beam(const struct ScriMedium *medium,
                                  enum ScriRoute route,
                                  double k,
                                  double beta,
                                  double theta0,
                                  size_t n_rho,
                                  size_t n_theta,
                                  struct ScriFarField **out);

/**
 * Number of angular samples.
 *
 * # Safety
 * `far` must be a live handle or null (returns 0).
 */
size_t scri_far_field_len(const struct ScriFarField *far);

/**
 * Copies angles and values into caller buffers of length `len`, which
 * must equal [`scri_far_field_len`]. Any of the three buffers may be null.
 *
 * # Safety
 * Non-null buffers must be valid for `len` writes.
 */
enum ScriStatus scri_far_field_values(const struct ScriFarField *far,
                                      size_t len,
                                      double *theta,
                                      double *re,
                                      double *im);

/**
 * # Safety
 * `far` must come from [`scri_scatter_beam`] and not be freed twice. Null
 * is ignored.
 */
void scri_far_field_free(struct ScriFarField *far);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCRI_H */
