#ifndef LZSIM_H
#define LZSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LzsimStatus {
  LZSIM_STATUS_OK = 0,
  LZSIM_STATUS_NULL_POINTER = 1,
  LZSIM_STATUS_INVALID_PARAMETER = 2,
  LZSIM_STATUS_DEGENERATE_DRIVE = 3,
  LZSIM_STATUS_NOT_HERMITIAN = 4,
  LZSIM_STATUS_NOT_NORMALIZED = 5,
  LZSIM_STATUS_INVALID_DENSITY_MATRIX = 6,
  LZSIM_STATUS_STEP_TOO_LARGE = 7,
  LZSIM_STATUS_INTEGRATION_ACCURACY = 8,
  LZSIM_STATUS_POSITIVITY_VIOLATION = 9,
  LZSIM_STATUS_FIT_FAILED = 10,
  LZSIM_STATUS_INDEX_OUT_OF_RANGE = 11,
  LZSIM_STATUS_PANIC = 12,
} LzsimStatus;

/**
 * Opaque drive handle.
 */
typedef struct LzsimDrive LzsimDrive;

/**
 * Opaque trajectory handle: times, populations and (for master runs) flux.
 */
typedef struct LzsimTrajectory LzsimTrajectory;

/**
 * Result of a linear sweep run.
 */
typedef struct LzsimLzResult {
  double p_analytic;
  double p_numeric;
  double p_diabatic;
  double t_start;
  double t_end;
  double dt;
} LzsimLzResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *lzsim_version(void);

/**
 * Message for the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *lzsim_last_error(void);

/**
 * Diabatic survival `exp(−2πJ²/|v−u|)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LzsimStatus lzsim_lz_probability(double j, double v, double u, double *out);

/**
 * One-pass transition probability `1 − exp(−2πJ²/(ω|v−u|))`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LzsimStatus lzsim_lz_pass_probability(double j, double v, double u, double omega, double *out);

/**
 * Loop integral to the branch point; exact value `iπJ²/(v−u)`.
 *
 * # Safety
 * `out_re` and `out_im` must be valid for writes.
 */
enum LzsimStatus lzsim_contour_integral(double j,
                                        double v,
                                        double u,
                                        size_t n_points,
                                        double *out_re,
                                        double *out_im);

/**
 * `P₁→₂(t)` for the static double well with mean energy, half-splitting and coupling.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LzsimStatus lzsim_static_transition_probability(double mean,
                                                     double delta,
                                                     double j,
                                                     double t,
                                                     double *out);

/**
 * Linear sweep from the adiabatic ground state. `half_window <= 0` and
 * `dt <= 0` select the defaults.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LzsimStatus lzsim_run_lz_experiment(double j,
                                         double v,
                                         double u,
                                         double half_window,
                                         double dt,
                                         struct LzsimLzResult *out);

/**
 * Linear sweep `diag(v t, u t)` with coupling `j`.
 *
 * # Safety
 * `out` must be valid for writes; the handle is released with [`lzsim_drive_free`].
 */
enum LzsimStatus lzsim_drive_linear(double v, double u, double j, struct LzsimDrive **out);

/**
 * Sinusoidal vibron `diag(v, u)·sin ωt`.
 *
 * # Safety
 * As [`lzsim_drive_linear`].
 */
enum LzsimStatus lzsim_drive_sinusoidal(double v,
                                        double u,
                                        double j,
                                        double omega,
                                        struct LzsimDrive **out);

/**
 * Cosine ansatz `diag(v, u)·(1 − α cos ωt)`.
 *
 * # Safety
 * As [`lzsim_drive_linear`].
 */
enum LzsimStatus lzsim_drive_cosine(double v,
                                    double u,
                                    double j,
                                    double omega,
                                    double alpha,
                                    struct LzsimDrive **out);

/**
 * # Safety
 * `drive` must be NULL or a handle not yet freed.
 */
void lzsim_drive_free(struct LzsimDrive *drive);

/**
 * Adiabatic gap `E₊(t) − E₋(t)`.
 *
 * # Safety
 * `drive` must be a live handle and `out` valid for writes.
 */
enum LzsimStatus lzsim_drive_adiabatic_gap(const struct LzsimDrive *drive, double t, double *out);

/**
 * Propagates `|1⟩` over `n_periods` vibron periods. `dt <= 0` selects the default step.
 *
 * # Safety
 * `drive` must be a live handle and `out` valid for writes; the result is
 * released with [`lzsim_trajectory_free`].
 */
enum LzsimStatus lzsim_run_vibron(const struct LzsimDrive *drive,
                                  size_t n_periods,
                                  double dt,
                                  size_t record_stride,
                                  struct LzsimTrajectory **out);

/**
 * Transfer efficiency for each of `n_alphas` cosine depths; `drive` must be a
 * cosine drive (its own α is ignored). Writes `n_alphas` values to `out_metrics`.
 *
 * # Safety
 * `alphas` must point to `n_alphas` readable values and `out_metrics` to
 * `n_alphas` writable ones.
 */
enum LzsimStatus lzsim_resonance_scan(const struct LzsimDrive *drive,
                                      const double *alphas,
                                      size_t n_alphas,
                                      size_t n_periods,
                                      double dt,
                                      double *out_metrics);

/**
 * Master equation for `H = sσx` with the detailed-balance dissipator, from
 * `diag(1 − p2_init, p2_init)` at `t = 0`. The trajectory carries the flux `γ⁻p₂`.
 *
 * # Safety
 * `out` must be valid for writes; release with [`lzsim_trajectory_free`].
 */
enum LzsimStatus lzsim_run_master(double s,
                                  double gamma_minus,
                                  double beta,
                                  double eps1,
                                  double eps2,
                                  double p2_init,
                                  double t_end,
                                  double dt,
                                  size_t record_stride,
                                  struct LzsimTrajectory **out);

/**
 * Number of records; 0 for NULL.
 *
 * # Safety
 * `traj` must be NULL or a live handle.
 */
size_t lzsim_trajectory_len(const struct LzsimTrajectory *traj);

/**
 * Time and populations of record `index`.
 *
 * # Safety
 * `traj` must be a live handle; the out-pointers must be valid for writes.
 */
enum LzsimStatus lzsim_trajectory_get(const struct LzsimTrajectory *traj,
                                      size_t index,
                                      double *out_time,
                                      double *out_p1,
                                      double *out_p2);

/**
 * Flux at record `index`; `LZSIM_STATUS_INVALID_PARAMETER` for trajectories without flux.
 *
 * # Safety
 * `traj` must be a live handle; `out` valid for writes.
 */
enum LzsimStatus lzsim_trajectory_flux(const struct LzsimTrajectory *traj,
                                       size_t index,
                                       double *out);

/**
 * # Safety
 * `traj` must be NULL or a handle not yet freed.
 */
void lzsim_trajectory_free(struct LzsimTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LZSIM_H */
