#ifndef TDGAUGE_H
#define TDGAUGE_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdgStatus {
  TDG_STATUS_OK = 0,
  TDG_STATUS_NULL_POINTER = 1,
  TDG_STATUS_INVALID_ARGUMENT = 2,
  TDG_STATUS_CONFIG = 3,
  TDG_STATUS_NUMERICAL = 4,
  TDG_STATUS_IO = 5,
  TDG_STATUS_PANIC = 6,
} TdgStatus;

/**
 * Model parameters together with the coupling envelope and Hamiltonian
 * family used for evolution.
 */
typedef struct TdgModel TdgModel;

typedef struct TdgTrajectory TdgTrajectory;

/**
 * Observables of one trajectory sample.
 */
typedef struct TdgSample {
  double t;
  double mu;
  double n_a;
  double n_b;
  double mutual_information;
  double e_c;
  double e_m;
  double work;
} TdgSample;

typedef struct TdgGroundState {
  double mutual_information;
  double n_a;
  double n_c;
} TdgGroundState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, or 0 if none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t tdg_last_error(char *buf, size_t len);

/**
 * Gauge in which the counter-rotating terms vanish, 1/(1 + δ).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum TdgStatus tdg_jc_gauge(double delta, double *out);

/**
 * New model with a smoothed-box envelope (switch-on `t0`, duration `tau`,
 * steepness `s`) and the standard Hamiltonian family. Evolution runs to
 * 2·t0 + tau.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum TdgStatus tdg_model_new_box(double delta,
                                 double eta_max,
                                 double alpha,
                                 double t0,
                                 double tau,
                                 double s,
                                 struct TdgModel **out);

/**
 * New model for a dipole crossing a Gaussian mode profile. `ratio_wc` is
 * w_c/ν in units of 1/ω_m, `offset_h` is h/w_c and `theta` the dipole
 * angle to the direction of motion. With `tilde` set the motion-corrected
 * Hamiltonian family is used. Evolution runs to the exit time.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum TdgStatus tdg_model_new_transit(double delta,
                                     double eta_max,
                                     double alpha,
                                     double ratio_wc,
                                     double offset_h,
                                     double theta,
                                     bool tilde,
                                     struct TdgModel **out);

/**
 * # Safety
 * `model` must be null or a handle from a `tdg_model_new*` call that has
 * not been freed.
 */
void tdg_model_free(struct TdgModel *model);

/**
 * Evolves the vacuum on `samples` equally spaced times.
 *
 * # Safety
 * `model` must be a live handle; `out` must be null or valid for writes.
 */
enum TdgStatus tdg_evolve_vacuum(const struct TdgModel *model,
                                 size_t samples,
                                 double tol,
                                 struct TdgTrajectory **out);

/**
 * Evolves a product of Gibbs states at β·ω_c and β·ω_m.
 *
 * # Safety
 * `model` must be a live handle; `out` must be null or valid for writes.
 */
enum TdgStatus tdg_evolve_thermal(const struct TdgModel *model,
                                  double beta_omega_c,
                                  double beta_omega_m,
                                  size_t samples,
                                  double tol,
                                  struct TdgTrajectory **out);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t tdg_trajectory_len(const struct TdgTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be null or valid for writes.
 */
enum TdgStatus tdg_trajectory_sample(const struct TdgTrajectory *traj,
                                     size_t index,
                                     struct TdgSample *out);

/**
 * # Safety
 * `traj` must be null or a live handle from `tdg_evolve*`.
 */
void tdg_trajectory_free(struct TdgTrajectory *traj);

/**
 * Closed-form ground-state correlations and photon numbers in gauge
 * `alpha` at full coupling.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum TdgStatus tdg_ground_state(double delta,
                                double eta_max,
                                double alpha,
                                struct TdgGroundState *out);

/**
 * Runs `command` ("simulate", "sweep" or "groundstate") on a TOML
 * configuration and returns the CSV in `*out`; release it with
 * [`tdg_string_free`].
 *
 * # Safety
 * `command` and `config_toml` must be null or NUL-terminated strings;
 * `out` must be null or valid for writes.
 */
enum TdgStatus tdg_run_csv(const char *command, const char *config_toml, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by [`tdg_run_csv`].
 */
void tdg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TDGAUGE_H */
