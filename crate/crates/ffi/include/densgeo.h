#ifndef DENSGEO_H
#define DENSGEO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DgStatus {
  DG_STATUS_OK = 0,
  DG_STATUS_NULL_POINTER = 1,
  DG_STATUS_INVALID_ARGUMENT = 2,
  DG_STATUS_UNKNOWN_PRESET = 3,
  DG_STATUS_DOMAIN = 4,
  DG_STATUS_DEGENERATE = 5,
  DG_STATUS_QUADRATURE = 6,
  DG_STATUS_TANGENCY = 7,
  // The path left the domain; the partial path is still returned.
  DG_STATUS_BOUNDARY_HIT = 8,
  DG_STATUS_NO_CONNECTION = 9,
  DG_STATUS_EMPTY_PROFILE = 10,
  DG_STATUS_PANIC = 11,
} DgStatus;

typedef enum DgCompletionHint {
  DG_COMPLETION_HINT_NONE = 0,
  DG_COMPLETION_HINT_ONE_POINT_AT_ZERO = 1,
  DG_COMPLETION_HINT_ONE_POINT_AT_INFINITY = 2,
  DG_COMPLETION_HINT_BOTH = 3,
} DgCompletionHint;

typedef struct DgPath DgPath;

// Coefficient spec with its arc-length profile.
typedef struct DgSpec DgSpec;

typedef struct DgCompleteness {
  double w_minus;
  double w_plus;
  bool complete;
  bool incomplete_toward_zero;
  bool incomplete_toward_infinity;
  enum DgCompletionHint completion_hint;
} DgCompleteness;

// One sample of a geodesic in reduced coordinates.
typedef struct DgSample {
  double t;
  double s;
  // `NaN` when the profile has no radial coordinate.
  double r;
  double theta;
  double s_t;
  double theta_t;
} DgSample;

// Maximum relative drift of the conserved quantities.
typedef struct DgDrift {
  double a0;
  double energy;
  double first_integral;
} DgDrift;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the untruncated length without the NUL, or
// 0 when there is no error.
//
// # Safety
// `buf` must be valid for `len` bytes or null.
size_t dg_last_error(char *buf, size_t len);

// Library version, a static NUL-terminated string.
const char *dg_version(void);

// Create a spec from a preset name (`reciprocal`, `fisher_rao`, `extended`,
// `reciprocal_sq`, `sphere_completion`, `cone`). `k` is the cone opening
// factor and is ignored by the other presets.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum DgStatus dg_spec_preset(const char *name, double k, struct DgSpec **out);

// # Safety
// `spec` must come from `dg_spec_preset` and not be freed already; null is
// ignored.
void dg_spec_free(struct DgSpec *spec);

// Range `(W₋, W₊)` of the arc-length coordinate; infinite ends are `±INFINITY`.
//
// # Safety
// `spec` must be a live handle; the outputs must be writable.
enum DgStatus dg_spec_arc_range(const struct DgSpec *spec, double *w_minus, double *w_plus);

// Warping function `a(s)`.
//
// # Safety
// `spec` must be a live handle; `out` must be writable.
enum DgStatus dg_spec_warp(const struct DgSpec *spec, double s, double *out);

// The two sectional curvatures at arc length `s`.
//
// # Safety
// `spec` must be a live handle; the outputs must be writable.
enum DgStatus dg_sectional(const struct DgSpec *spec,
                           double s,
                           double *sec_sphere,
                           double *sec_mixed);

// # Safety
// `spec` must be a live handle; `out` must be writable.
enum DgStatus dg_classify(const struct DgSpec *spec, struct DgCompleteness *out);

// Shoot a geodesic from radius `r0` in direction `phi0` (values on an
// `n`-point grid, normalized internally) with radial speed `r_t0` and
// sphere speed `psi_norm` along a deterministic direction orthogonal to
// `phi0`. `weights` may be null for the uniform grid.
//
// On [`DgStatus::BoundaryHit`] `*out` still receives the partial path.
//
// # Safety
// `weights` (if non-null) and `phi0` must hold `n` values; `spec` must be a
// live handle; `out` must be writable.
enum DgStatus dg_shoot(const struct DgSpec *spec,
                       size_t n,
                       const double *weights,
                       const double *phi0,
                       double r0,
                       double r_t0,
                       double psi_norm,
                       double t_end,
                       size_t n_steps,
                       struct DgPath **out);

// Shortest geodesic found between the fields `f0` and `f1` (positive norm,
// `n` values each). The path is parametrized on `[0, 1]` with constant
// speed `*distance`.
//
// # Safety
// `weights` (if non-null), `f0` and `f1` must hold `n` values; `spec` must
// be a live handle; the outputs must be writable.
enum DgStatus dg_connect(const struct DgSpec *spec,
                         size_t n,
                         const double *weights,
                         const double *f0,
                         const double *f1,
                         double tol,
                         double *distance,
                         struct DgPath **out);

// Number of samples; 0 for a null handle.
//
// # Safety
// `path` must be a live handle or null.
size_t dg_path_len(const struct DgPath *path);

// # Safety
// `path` must be a live handle; `out` must be writable.
enum DgStatus dg_path_sample(const struct DgPath *path, size_t k, struct DgSample *out);

// Field values `f(t_k)`, written to `out[0..n]`.
//
// # Safety
// `path` must be a live handle; `out` must hold `n` values.
enum DgStatus dg_path_field(const struct DgPath *path, size_t k, double *out, size_t n);

// # Safety
// `path` must be a live handle; `out` must be writable.
enum DgStatus dg_path_drift(const struct DgPath *path, struct DgDrift *out);

// # Safety
// `path` must come from `dg_shoot`/`dg_connect` and not be freed already;
// null is ignored.
void dg_path_free(struct DgPath *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DENSGEO_H */
