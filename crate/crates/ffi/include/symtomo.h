#ifndef SYMTOMO_H
#define SYMTOMO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SymtomoStateKind {
  SYMTOMO_STATE_KIND_COHERENT = 0,
  SYMTOMO_STATE_KIND_EVEN_CAT = 1,
  SYMTOMO_STATE_KIND_ODD_CAT = 2,
} SymtomoStateKind;

typedef enum SymtomoStatus {
  SYMTOMO_STATUS_OK = 0,
  SYMTOMO_STATUS_NULL_POINTER = 1,
  SYMTOMO_STATUS_INVALID_ARGUMENT = 2,
  SYMTOMO_STATUS_INTEGRATION = 3,
  SYMTOMO_STATUS_OUT_OF_RANGE = 4,
  SYMTOMO_STATUS_COVERAGE = 5,
  SYMTOMO_STATUS_NUMERICAL = 6,
  SYMTOMO_STATUS_PANIC = 7,
} SymtomoStatus;

/**
 * Opaque solved trajectory.
 */
typedef struct SymtomoTrajectory SymtomoTrajectory;

typedef struct SymtomoSample {
  double eps_re;
  double eps_im;
  double eps_dot_re;
  double eps_dot_im;
} SymtomoSample;

typedef struct SymtomoFrame {
  double mu;
  double nu;
  double delta;
} SymtomoFrame;

typedef struct SymtomoState {
  enum SymtomoStateKind kind;
  double alpha_re;
  double alpha_im;
} SymtomoState;

/**
 * `n` equally spaced points from `min` to `max` inclusive.
 */
typedef struct SymtomoGrid {
  double min;
  double max;
  size_t n;
} SymtomoGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *symtomo_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * always NUL-terminated when `len > 0`). Returns the full message length
 * without the terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t symtomo_last_error_message(char *buf, size_t len);

/**
 * Solves the trajectory on `[0, t_end]` and stores a new handle in `*out`.
 *
 * # Safety
 * `out` must be NULL or a valid pointer to writable storage for a pointer.
 */
enum SymtomoStatus symtomo_trajectory_solve(double kappa,
                                            double omega_mod,
                                            double t_end,
                                            double tol,
                                            struct SymtomoTrajectory **out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `traj` must be NULL or a handle from [`symtomo_trajectory_solve`] that has
 * not been freed.
 */
void symtomo_trajectory_free(struct SymtomoTrajectory *traj);

/**
 * Number of stored integrator nodes.
 *
 * # Safety
 * `traj` must be NULL or a live handle.
 */
size_t symtomo_trajectory_len(const struct SymtomoTrajectory *traj);

/**
 * `ε(t)` and `ε̇(t)` by dense interpolation.
 *
 * # Safety
 * `traj` must be NULL or a live handle; `out` NULL or writable.
 */
enum SymtomoStatus symtomo_trajectory_eval(const struct SymtomoTrajectory *traj,
                                           double t,
                                           struct SymtomoSample *out);

/**
 * Largest `|Im(ε ε̇*) + 1|` over the stored nodes.
 *
 * # Safety
 * `traj` must be NULL or a live handle; `out` NULL or writable.
 */
enum SymtomoStatus symtomo_trajectory_max_wronskian_residual(const struct SymtomoTrajectory *traj,
                                                             double *out);

/**
 * Mean and variance of `X = μq + νp + δ` for the coherent packet at time `t`.
 *
 * # Safety
 * `traj` must be NULL or a live handle; `mean`, `variance` NULL or writable.
 */
enum SymtomoStatus symtomo_gaussian_moments(const struct SymtomoTrajectory *traj,
                                            double t,
                                            double alpha_re,
                                            double alpha_im,
                                            struct SymtomoFrame frame,
                                            double *mean,
                                            double *variance);

/**
 * Closed-form tomogram of `state` at time `t` on `x_grid`, written to
 * `out[0..x_grid.n]`.
 *
 * # Safety
 * `traj` must be NULL or a live handle; `out` NULL or `out_len` writable doubles.
 */
enum SymtomoStatus symtomo_marginal(const struct SymtomoTrajectory *traj,
                                    double t,
                                    struct SymtomoState state,
                                    struct SymtomoFrame frame,
                                    struct SymtomoGrid x_grid,
                                    double *out,
                                    size_t out_len);

/**
 * Analytic Wigner map (`∫W dq dp = 2π`) at time `t`, q-major, written to
 * `out[0..q_grid.n * p_grid.n]`.
 *
 * # Safety
 * `traj` must be NULL or a live handle; `out` NULL or `out_len` writable doubles.
 */
enum SymtomoStatus symtomo_wigner(const struct SymtomoTrajectory *traj,
                                  double t,
                                  struct SymtomoState state,
                                  struct SymtomoGrid q_grid,
                                  struct SymtomoGrid p_grid,
                                  double *out,
                                  size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMTOMO_H */
