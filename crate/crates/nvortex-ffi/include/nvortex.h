/* C interface for the nvortex vortex soliton solver. */

#pragma once

/* Generated with cbindgen:0.29.4 */

/* This file is generated from the Rust sources with cbindgen; do not edit by hand. */

#include <stdint.h>
#include <stddef.h>
#include <stdbool.h>

// Status codes returned by every fallible call.
typedef enum NvxStatus {
  NVX_STATUS_OK = 0,
  // Null pointer, bad enum value, or parameter outside its domain.
  NVX_STATUS_INVALID_ARGUMENT = 1,
  // A numerical operation failed (factorization, bracketing, ...).
  NVX_STATUS_NUMERICAL = 2,
  // The solver stopped without meeting its gradient tolerance; the
  // best iterate is still returned when an output handle is supplied.
  NVX_STATUS_NOT_CONVERGED = 3,
  // The shooting oracle found no sign change over its scan range.
  NVX_STATUS_NO_BRACKET = 4,
  // Operation unsupported for this configuration (e.g. κ outside the
  // admissible interval).
  NVX_STATUS_UNSUPPORTED = 5,
  // A panic was caught at the FFI boundary.
  NVX_STATUS_INTERNAL = 6,
} NvxStatus;

// Opaque solution handle.
typedef struct NvxSolution NvxSolution;

// Opaque solver handle: parameters + discretization + settings.
typedef struct NvxSolver NvxSolver;

// Bounds report with plain C layout. `sigma` is NaN when no κ was
// supplied.
typedef struct NvxBoundsReport {
  double r0;
  double kappa_lower;
  double kappa_upper;
  double sigma;
  bool winding_negative;
  bool small_flux_excluded;
  double r_indefinite;
  double r_nehari;
  double kappa_interval_lo;
  double kappa_interval_hi;
} NvxBoundsReport;

// Create a solver handle. `basis_kind`: 0 = spectral sine, 1 = P1 hats.
// `cells = 0` picks the default mesh (512 cells for sine, `n_funcs + 1`
// for hats). On success writes the handle to `out`.
//
// # Safety
// `out` must be a valid pointer to an `NvxSolver*` slot.
enum NvxStatus nvx_solver_new(double alpha,
                              int32_t winding,
                              double radius,
                              uint32_t basis_kind,
                              size_t n_funcs,
                              size_t cells,
                              struct NvxSolver **out);

// # Safety
// `solver` must be a handle from [`nvx_solver_new`] not yet freed.
void nvx_solver_free(struct NvxSolver *solver);

// # Safety
// `solver` must be a live handle.
enum NvxStatus nvx_solver_set_seed(struct NvxSolver *solver, uint64_t seed);

// # Safety
// `solver` must be a live handle.
enum NvxStatus nvx_solver_set_restarts(struct NvxSolver *solver, uint32_t restarts);

// # Safety
// `solver` must be a live handle.
enum NvxStatus nvx_solver_set_tolerance(struct NvxSolver *solver, double grad_tol);

// Minimize the action at prescribed flux `q0`; κ is recovered. On
// `NotConverged` the best iterate is still written to `out`.
//
// # Safety
// `solver` must be a live handle and `out` a valid slot.
enum NvxStatus nvx_solve_flux(const struct NvxSolver *solver, double q0, struct NvxSolution **out);

// Fixed-κ Nehari solve; the flux is an output.
//
// # Safety
// `solver` must be a live handle and `out` a valid slot.
enum NvxStatus nvx_solve_kappa(const struct NvxSolver *solver,
                               double kappa,
                               struct NvxSolution **out);

// # Safety
// `solution` must come from a solve call and not be freed twice.
void nvx_solution_free(struct NvxSolution *solution);

// Recovered propagation constant κ (NaN on a null handle).
//
// # Safety
// `solution` must be a live handle or null.
double nvx_solution_kappa(const struct NvxSolution *solution);

// Achieved energy flux Q(u) (NaN on a null handle).
//
// # Safety
// `solution` must be a live handle or null.
double nvx_solution_flux(const struct NvxSolution *solution);

// Action value I(u) (NaN on a null handle).
//
// # Safety
// `solution` must be a live handle or null.
double nvx_solution_action(const struct NvxSolution *solution);

// Strong residual of the n-vortex equation (NaN on a null handle).
//
// # Safety
// `solution` must be a live handle or null.
double nvx_solution_residual(const struct NvxSolution *solution);

// Whether the solve met its gradient tolerance (false on null).
//
// # Safety
// `solution` must be a live handle or null.
bool nvx_solution_converged(const struct NvxSolution *solution);

// # Safety
// `solution` must be a live handle or null.
uint64_t nvx_solution_iterations(const struct NvxSolution *solution);

// Number of basis coefficients in the solution.
//
// # Safety
// `solution` must be a live handle or null.
size_t nvx_solution_coeff_count(const struct NvxSolution *solution);

// Copy the coefficient vector into a caller buffer of length `len`
// (which must match `nvx_solution_coeff_count`).
//
// # Safety
// `buffer` must point to at least `len` writable doubles.
enum NvxStatus nvx_solution_coeffs(const struct NvxSolution *solution, double *buffer, size_t len);

// Evaluate the solution amplitude `u(r)`.
//
// # Safety
// `solution` must be a live handle or null (null returns NaN).
double nvx_solution_eval(const struct NvxSolution *solution, double r);

// Closed-form bounds for one parameter set. Pass `kappa` as a pointer so
// it can be omitted (NULL); with no κ the κ-dependent thresholds use the
// interval midpoint.
//
// # Safety
// `kappa` must be null or point to a double; `out` must be valid.
enum NvxStatus nvx_bounds_report(double alpha,
                                 int32_t winding,
                                 double radius,
                                 double q0,
                                 const double *kappa,
                                 struct NvxBoundsReport *out);

// Energy flux of the shooting oracle's ground profile at fixed κ.
//
// # Safety
// `out_flux` must point to a writable double.
enum NvxStatus nvx_oracle_flux(double alpha,
                               int32_t winding,
                               double radius,
                               double kappa,
                               double *out_flux);

// Static description of a status code.
const char *nvx_status_message(enum NvxStatus status);
