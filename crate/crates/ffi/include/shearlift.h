#ifndef SHEARLIFT_H
#define SHEARLIFT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_ARGUMENT = 2,
  SL_STATUS_CONFIG = 3,
  SL_STATUS_DOMAIN = 4,
  SL_STATUS_GUARD_BAND = 5,
  SL_STATUS_SOLVER = 6,
  SL_STATUS_NUMERIC = 7,
  SL_STATUS_IO = 8,
  SL_STATUS_PANIC = 9,
} SlStatus;

typedef enum SlVerdict {
  SL_VERDICT_EINSTEIN = 0,
  SL_VERDICT_QUASI_EINSTEIN = 1,
  SL_VERDICT_FAIL = 2,
} SlVerdict;

/**
 * A solved lift: the metric field plus the run configuration it came from.
 */
typedef struct SlLift SlLift;

/**
 * CR data of a potential at one point of the `z`-plane.
 */
typedef struct SlCrData {
  double fzzbar;
  double c_re;
  double c_im;
  /**
   * Ricci scalar of the Kähler quotient.
   */
  double ricci;
  double structure_residual;
} SlCrData;

typedef struct SlVerifySummary {
  enum SlVerdict verdict;
  double lambda_fit;
  double pattern_residual;
  double max_phi;
  double min_psi2;
  double max_shearfree_residual;
} SlVerifySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length excluding the NUL.
 * Returns 0 when the last call succeeded. `buf` may be null to query the length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sl_last_error(char *buf, size_t len);

/**
 * CR data at `(x, y)`. `kind` is a catalog name or `"custom"`; `expr` is the
 * potential expression for custom and harmonic/tubular kinds and may be null.
 *
 * # Safety
 * `kind` must be a NUL-terminated string, `expr` null or NUL-terminated, and
 * `out` a valid pointer.
 */
enum SlStatus sl_cr_data(const char *kind,
                         const char *expr,
                         double x,
                         double y,
                         struct SlCrData *out);

/**
 * Resolves the conformal factor for a TOML run configuration and returns a
 * lift handle in `*out`.
 *
 * # Safety
 * `config_toml` must be NUL-terminated and `out` a valid pointer.
 */
enum SlStatus sl_lift_new(const char *config_toml, struct SlLift **out);

/**
 * Releases a lift handle; null is ignored.
 *
 * # Safety
 * `lift` must come from [`sl_lift_new`] and not be used afterwards.
 */
void sl_lift_free(struct SlLift *lift);

/**
 * Metric components at `coords = (x, y, u, r)`, row-major into `out[16]`.
 *
 * # Safety
 * `coords` must point to 4 doubles and `out` to 16 writable doubles.
 */
enum SlStatus sl_lift_metric(const struct SlLift *lift, const double *coords, double *out);

/**
 * The conformal factor `p` at `(x, y)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SlStatus sl_lift_p(const struct SlLift *lift, double x, double y, double *out);

/**
 * The cosmological constant of the lift.
 *
 * # Safety
 * `lift` must be a valid handle or null (which yields NaN).
 */
double sl_lift_lambda(const struct SlLift *lift);

/**
 * Runs the verification pipeline for the lift's configuration. When
 * `report_json` is non-null it receives the full report, to be released
 * with [`sl_string_free`]. A `fail` verdict is still `SL_STATUS_OK`.
 *
 * # Safety
 * `summary` must be valid; `report_json` null or valid.
 */
enum SlStatus sl_lift_verify(const struct SlLift *lift,
                             struct SlVerifySummary *summary,
                             char **report_json);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void sl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHEARLIFT_H */
