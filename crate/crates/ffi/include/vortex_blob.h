#ifndef VORTEX_BLOB_H
#define VORTEX_BLOB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VbStatus {
  VB_STATUS_OK = 0,
  VB_STATUS_NULL_POINTER = 1,
  VB_STATUS_DOMAIN = 2,
  VB_STATUS_INVALID_SHEET = 3,
  VB_STATUS_BLOW_UP = 4,
  VB_STATUS_DRIFT_EXCEEDED = 5,
  VB_STATUS_CONFIG = 6,
  VB_STATUS_CORRUPT_SNAPSHOT = 7,
  VB_STATUS_IO = 8,
  VB_STATUS_BUFFER_TOO_SMALL = 9,
  VB_STATUS_INVALID_STRING = 10,
  VB_STATUS_PANIC = 11,
} VbStatus;

typedef enum VbKind {
  VB_KIND_LOADED_WING = 0,
  VB_KIND_FUSELAGE_FLAP = 1,
} VbKind;

/**
 * Opaque handle to a discrete vortex sheet.
 */
typedef struct VbSheet VbSheet;

typedef struct VbVec2 {
  double x;
  double y;
} VbVec2;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *vb_last_error(void);

/**
 * Discretizes initial data with `n_intervals` intervals (`n_intervals + 1` vortices).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum VbStatus vb_sheet_discretize(enum VbKind kind,
                                  size_t n_intervals,
                                  double eps,
                                  struct VbSheet **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `sheet` must be NULL or a handle from this library not yet freed.
 */
void vb_sheet_free(struct VbSheet *sheet);

/**
 * Number of vortices, or 0 for a NULL handle.
 *
 * # Safety
 * `sheet` must be NULL or a live handle.
 */
size_t vb_sheet_len(const struct VbSheet *sheet);

/**
 * Simulation time of the sheet, NaN for a NULL handle.
 *
 * # Safety
 * `sheet` must be NULL or a live handle.
 */
double vb_sheet_time(const struct VbSheet *sheet);

/**
 * Blob size of the sheet, NaN for a NULL handle.
 *
 * # Safety
 * `sheet` must be NULL or a live handle.
 */
double vb_sheet_eps(const struct VbSheet *sheet);

/**
 * Copies positions, circulations and sheet parameters. Any of the output
 * pointers may be NULL to skip that array; the others need `capacity >= len`.
 *
 * # Safety
 * Non-NULL outputs must point to at least `capacity` writable values.
 */
enum VbStatus vb_sheet_copy(const struct VbSheet *sheet,
                            struct VbVec2 *positions,
                            double *weights,
                            double *alphas,
                            size_t capacity);

/**
 * Regularized velocity of every vortex.
 *
 * # Safety
 * `out` must point to at least `capacity` writable values.
 */
enum VbStatus vb_sheet_velocities(const struct VbSheet *sheet, struct VbVec2 *out, size_t capacity);

/**
 * Advances the sheet in place by one classical Runge-Kutta step.
 * On failure the sheet is left unchanged.
 *
 * # Safety
 * `sheet` must be a live handle not used concurrently.
 */
enum VbStatus vb_sheet_rk4_step(struct VbSheet *sheet, double dt);

/**
 * Regularized Hamiltonian `H^eps`.
 *
 * # Safety
 * `out` must be writable.
 */
enum VbStatus vb_sheet_hamiltonian(const struct VbSheet *sheet, double *out);

/**
 * Linear impulse `sum w_j z_j`.
 *
 * # Safety
 * `out` must be writable.
 */
enum VbStatus vb_sheet_impulse(const struct VbSheet *sheet, struct VbVec2 *out);

/**
 * Reads a binary snapshot file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum VbStatus vb_snapshot_read(const char *path, struct VbSheet **out);

/**
 * Writes a binary snapshot file.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum VbStatus vb_snapshot_write(const struct VbSheet *sheet, const char *path);

/**
 * Global maximal function on an `nd x nd` grid: writes `levels` radii and
 * values.
 *
 * # Safety
 * `radii` and `values` must each hold `capacity` writable values.
 */
enum VbStatus vb_maximal_global(const struct VbSheet *sheet,
                                size_t nd,
                                size_t levels,
                                double *radii,
                                double *values,
                                size_t capacity);

/**
 * Total `|w|` within each radius of vortex `center_index`; `radii` must be
 * strictly increasing.
 *
 * # Safety
 * `radii` must hold `count` values and `values` `count` writable values.
 */
enum VbStatus vb_maximal_local(const struct VbSheet *sheet,
                               size_t center_index,
                               const double *radii,
                               size_t count,
                               double *values);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VORTEX_BLOB_H */
