#ifndef CGVF_H
#define CGVF_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CgvfStatus {
  CGVF_STATUS_OK = 0,
  CGVF_STATUS_NULL_POINTER = 1,
  CGVF_STATUS_INVALID_ARGUMENT = 2,
  CGVF_STATUS_DIMENSION_MISMATCH = 3,
  CGVF_STATUS_SEPARATION_VIOLATION = 4,
  CGVF_STATUS_CONFIG = 5,
  CGVF_STATUS_IO = 6,
  CGVF_STATUS_PANIC = 7,
} CgvfStatus;

/**
 * A running simulation loaded from a scenario.
 */
typedef struct CgvfSimulation CgvfSimulation;

/**
 * A builtin parametric surface.
 */
typedef struct CgvfSurface CgvfSurface;

/**
 * Snapshot of the run metrics. Pair quantities are NaN when undefined.
 */
typedef struct CgvfMetrics {
  double time;
  double phi_max;
  double eps_max;
  double mean_offset;
  double min_sep;
  double max_neighbor_sep;
  double lyapunov;
  double maneuver_max;
} CgvfMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length including the NUL,
 * or 0 when there is no error. `buf` may be null to query the length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cgvf_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cgvf_version(void);

/**
 * Repulsion weight `alpha(s)` for safe radius `r` and sensing radius `big_r`.
 *
 * # Safety
 * `out` must be null or a valid pointer to one `double`.
 */
enum CgvfStatus cgvf_repulsion_weight(double s, double r, double big_r, double *out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CgvfStatus cgvf_surface_new_torus(double major, double minor, struct CgvfSurface **out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CgvfStatus cgvf_surface_new_plane(struct CgvfSurface **out);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum CgvfStatus cgvf_surface_new_wave(double amplitude,
                                      double freq1,
                                      double freq2,
                                      struct CgvfSurface **out);

/**
 * # Safety
 * `surface` must be null or a handle from `cgvf_surface_new_*` not yet freed.
 */
void cgvf_surface_free(struct CgvfSurface *surface);

/**
 * Ambient dimension, or 0 for a null handle.
 *
 * # Safety
 * `surface` must be null or a live handle.
 */
size_t cgvf_surface_dim(const struct CgvfSurface *surface);

/**
 * Writes `f(w1, w2)` into `out` (`len` must equal the ambient dimension).
 *
 * # Safety
 * `surface` must be a live handle and `out` must hold `len` doubles.
 */
enum CgvfStatus cgvf_surface_eval(const struct CgvfSurface *surface,
                                  double w1,
                                  double w2,
                                  double *out,
                                  size_t len);

/**
 * Writes the two Jacobian columns into `d1` and `d2`, each of length `len`.
 *
 * # Safety
 * `surface` must be a live handle; `d1` and `d2` must each hold `len`
 * doubles.
 */
enum CgvfStatus cgvf_surface_jacobian(const struct CgvfSurface *surface,
                                      double w1,
                                      double w2,
                                      double *d1,
                                      double *d2,
                                      size_t len);

/**
 * Loads a scenario file and prepares its initial state.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum CgvfStatus cgvf_simulation_from_file(const char *path, struct CgvfSimulation **out);

/**
 * Parses scenario TOML text and prepares its initial state.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` a valid handle slot.
 */
enum CgvfStatus cgvf_simulation_from_toml(const char *text, struct CgvfSimulation **out);

/**
 * # Safety
 * `sim` must be null or a live handle.
 */
void cgvf_simulation_free(struct CgvfSimulation *sim);

/**
 * Number of robots, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t cgvf_simulation_robot_count(const struct CgvfSimulation *sim);

/**
 * Ambient dimension of the robots' positions, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t cgvf_simulation_dim(const struct CgvfSimulation *sim);

/**
 * Current simulation time, or NaN for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
double cgvf_simulation_time(const struct CgvfSimulation *sim);

/**
 * Advances `steps` RK4 steps of the scenario's `dt`. On failure the state
 * stays at the last completed step.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum CgvfStatus cgvf_simulation_step(struct CgvfSimulation *sim, size_t steps);

/**
 * Metrics of the current state.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum CgvfStatus cgvf_simulation_metrics(const struct CgvfSimulation *sim, struct CgvfMetrics *out);

/**
 * Copies robot `index`'s position (`x_len` must equal the dimension),
 * virtual coordinates and target estimate. `omega` and `omega_hat` may be
 * null; otherwise each must hold two doubles.
 *
 * # Safety
 * Pointers must be null where allowed or valid for the stated lengths.
 */
enum CgvfStatus cgvf_simulation_robot(const struct CgvfSimulation *sim,
                                      size_t index,
                                      double *x,
                                      size_t x_len,
                                      double *omega,
                                      double *omega_hat);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CGVF_H */
