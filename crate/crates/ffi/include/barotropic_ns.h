#ifndef BAROTROPIC_NS_H
#define BAROTROPIC_NS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum BnsStatus {
  BNS_STATUS_OK = 0,
  BNS_STATUS_NULL_POINTER = 1,
  // Unusable laws, parameters or buffer sizes.
  BNS_STATUS_INVALID_ARGUMENT = 2,
  // An argument outside the domain of the requested function.
  BNS_STATUS_DOMAIN = 3,
  // Root finding, quadrature or ODE integration failed.
  BNS_STATUS_SOLVER = 4,
  // Density fell below the vacuum floor, or the time step collapsed.
  BNS_STATUS_BREAKDOWN = 5,
  BNS_STATUS_IO = 6,
  // A Rust panic was caught at the boundary.
  BNS_STATUS_PANIC = 7,
} BnsStatus;

// Opaque constitutive laws.
typedef struct BnsLaws BnsLaws;

// Opaque stationary profile on a uniform grid.
typedef struct BnsProfile BnsProfile;

// Opaque time integrator together with its current state.
typedef struct BnsSimulation BnsSimulation;

typedef struct BnsJumpVerdict {
  double mass_residual;
  double momentum_residual;
  double entropy_jump;
  bool admissible;
} BnsJumpVerdict;

// Two-point boundary data on `[-half_length, half_length]`.
typedef struct BnsBoundary {
  double half_length;
  double epsilon;
  double u_minus;
  double u_plus;
  double v_minus;
} BnsBoundary;

// Discretisation parameters. `right_closure` is 0 for the one-sided
// Neumann closure and 1 for linear extrapolation.
typedef struct BnsScheme {
  size_t n;
  double cfl_hyperbolic;
  double cfl_parabolic;
  double t_final;
  double vacuum_floor;
  uint32_t right_closure;
} BnsScheme;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *bns_version(void);

// Copies the calling thread's last error message into `buf` (always
// NUL-terminated when `len > 0`) and returns the full message length
// excluding the terminator; 0 when there is no error.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t bns_last_error_message(char *buf, size_t len);

// `P(u) = κ u^γ`, `ν(u) = c u^a`.
//
// # Safety
// `out` must be null or valid for writes.
enum BnsStatus bns_laws_new_power(double kappa,
                                  double gamma,
                                  double c,
                                  double a,
                                  struct BnsLaws **out);

// `P(u) = ½ κ u²`, `ν(u) = c u^a`.
//
// # Safety
// `out` must be null or valid for writes.
enum BnsStatus bns_laws_new_saint_venant(double kappa, double c, double a, struct BnsLaws **out);

// # Safety
// `laws` must be null or a handle from `bns_laws_new_*` not yet freed.
void bns_laws_free(struct BnsLaws *laws);

// Lower edge `ᾱ` of the admissible `α` range for the given momentum.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_alpha_bar(const struct BnsLaws *laws,
                             double v_star,
                             double u_minus,
                             double u_plus,
                             double *out);

// Membership of `(v*, α)` in the admissible region and its margin.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_sigma_membership(const struct BnsLaws *laws,
                                    double v_star,
                                    double alpha,
                                    double u_minus,
                                    double u_plus,
                                    bool *in_sigma,
                                    double *margin);

// Length of the orbit from `u-` to `u+` at the given `α`.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_length(const struct BnsLaws *laws,
                          double alpha,
                          double v_star,
                          double u_minus,
                          double u_plus,
                          double epsilon,
                          double *out);

// Jump relation residuals and entropy verdict for a discontinuity moving
// at speed `c`.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_assess_jump(const struct BnsLaws *laws,
                               double rho_minus,
                               double w_minus,
                               double rho_plus,
                               double w_plus,
                               double c,
                               struct BnsJumpVerdict *out);

// Solves for the stationary connection on `n` uniform intervals.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_solve_steady(const struct BnsLaws *laws,
                                const struct BnsBoundary *boundary,
                                size_t n,
                                struct BnsProfile **out);

// # Safety
// `profile` must be null or a handle from `bns_solve_steady` not yet freed.
void bns_profile_free(struct BnsProfile *profile);

// Number of grid nodes (`n + 1`), or 0 for a null handle.
//
// # Safety
// `profile` must be null or a live handle.
size_t bns_profile_len(const struct BnsProfile *profile);

// `α*`, `v̄` and the sup ODE residual of the profile.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_profile_summary(const struct BnsProfile *profile,
                                   double *alpha_star,
                                   double *v_bar,
                                   double *residual);

// Copies nodes and `ū` into caller buffers of at least
// `bns_profile_len` values.
//
// # Safety
// `x` and `u` must point to `len` writable doubles.
enum BnsStatus bns_profile_copy(const struct BnsProfile *profile, double *x, double *u, size_t len);

// Creates a simulation started from the stationary profile (`profile`
// non-null) or from the tanh front centred at `a` with steepness `b`
// (`profile` null).
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_simulation_new(const struct BnsLaws *laws,
                                  const struct BnsBoundary *boundary,
                                  const struct BnsScheme *scheme,
                                  const struct BnsProfile *profile,
                                  double tanh_a,
                                  double tanh_b,
                                  struct BnsSimulation **out);

// # Safety
// `sim` must be null or a handle from `bns_simulation_new` not yet freed.
void bns_simulation_free(struct BnsSimulation *sim);

// Advances one CFL-limited step (clipped at the final time) and reports
// the step taken; a call at the final time is a no-op with `dt = 0`.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_simulation_step(struct BnsSimulation *sim, double *dt);

// Integrates to the final time.
//
// # Safety
// `sim` must be null or a live handle.
enum BnsStatus bns_simulation_run(struct BnsSimulation *sim);

// Current time, or NaN for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
double bns_simulation_time(const struct BnsSimulation *sim);

// Copies the current `u` and `v` into buffers of at least `n + 1` values.
//
// # Safety
// `u` and `v` must point to `len` writable doubles.
enum BnsStatus bns_simulation_copy_state(const struct BnsSimulation *sim,
                                         double *u,
                                         double *v,
                                         size_t len);

// Modulated energy `L` and `L²` distance of the current state from a
// profile on the same grid.
//
// # Safety
// Pointers must be null or valid.
enum BnsStatus bns_simulation_distance(const struct BnsSimulation *sim,
                                       const struct BnsProfile *profile,
                                       double *energy,
                                       double *l2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BAROTROPIC_NS_H */
