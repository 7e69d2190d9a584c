//! C ABI for the nvortex solver.
//!
//! The surface follows the usual opaque-handle pattern: a solver handle
//! owns the discretization (basis, mesh, parameters, iteration settings),
//! solve calls return solution handles, and every fallible function
//! reports an [`NvxStatus`]. Getters on a null or mismatched handle
//! return NaN rather than crashing. All functions are panic-safe: a Rust
//! panic is caught at the boundary and surfaced as
//! [`NvxStatus::Internal`].
//!
//! The matching C header lives in `include/nvortex.h` (generated with
//! cbindgen; see `cbindgen.toml`).

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use nvortex::basis::{BasisKind, BasisSet, Mesh};
use nvortex::bounds;
use nvortex::model::Params;
use nvortex::optimizer::{self, SolveError, SolveResult, SolverSettings};
use nvortex::oracle;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvxStatus {
    Ok = 0,
    /// Null pointer, bad enum value, or parameter outside its domain.
    InvalidArgument = 1,
    /// A numerical operation failed (factorization, bracketing, ...).
    Numerical = 2,
    /// The solver stopped without meeting its gradient tolerance; the
    /// best iterate is still returned when an output handle is supplied.
    NotConverged = 3,
    /// The shooting oracle found no sign change over its scan range.
    NoBracket = 4,
    /// Operation unsupported for this configuration (e.g. κ outside the
    /// admissible interval).
    Unsupported = 5,
    /// A panic was caught at the FFI boundary.
    Internal = 6,
}

/// Opaque solver handle: parameters + discretization + settings.
pub struct NvxSolver {
    params: Params,
    basis: Arc<BasisSet>,
    settings: SolverSettings,
}

/// Opaque solution handle.
pub struct NvxSolution {
    result: SolveResult,
}

/// Bounds report with plain C layout. `sigma` is NaN when no κ was
/// supplied.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NvxBoundsReport {
    pub r0: f64,
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    pub sigma: f64,
    pub winding_negative: bool,
    pub small_flux_excluded: bool,
    pub r_indefinite: f64,
    pub r_nehari: f64,
    pub kappa_interval_lo: f64,
    pub kappa_interval_hi: f64,
}

fn status_of(err: &SolveError) -> NvxStatus {
    match err {
        SolveError::Config(_) => NvxStatus::InvalidArgument,
        SolveError::NotConverged { .. } => NvxStatus::NotConverged,
        SolveError::NoSignChange { .. } => NvxStatus::Numerical,
        SolveError::KappaOutsideInterval { .. } | SolveError::RadiusBelowThreshold { .. } => {
            NvxStatus::Unsupported
        }
        SolveError::Basis(_) => NvxStatus::InvalidArgument,
        SolveError::Model(_) => NvxStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> NvxStatus>(f: F) -> NvxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => NvxStatus::Internal,
    }
}

/// Create a solver handle. `basis_kind`: 0 = spectral sine, 1 = P1 hats.
/// `cells = 0` picks the default mesh (512 cells for sine, `n_funcs + 1`
/// for hats). On success writes the handle to `out`.
///
/// # Safety
/// `out` must be a valid pointer to an `NvxSolver*` slot.
#[no_mangle]
pub unsafe extern "C" fn nvx_solver_new(
    alpha: f64,
    winding: i32,
    radius: f64,
    basis_kind: u32,
    n_funcs: usize,
    cells: usize,
    out: *mut *mut NvxSolver,
) -> NvxStatus {
    if out.is_null() {
        return NvxStatus::InvalidArgument;
    }
    guard(|| {
        let kind = match basis_kind {
            0 => BasisKind::SpectralSine,
            1 => BasisKind::HatP1,
            _ => return NvxStatus::InvalidArgument,
        };
        let Ok(params) = Params::new(alpha, winding, radius) else {
            return NvxStatus::InvalidArgument;
        };
        let cells = if cells == 0 {
            match kind {
                BasisKind::SpectralSine => nvortex::basis::DEFAULT_CELLS,
                BasisKind::HatP1 => n_funcs + 1,
            }
        } else {
            cells
        };
        let Ok(mesh) = Mesh::uniform(radius, cells) else {
            return NvxStatus::InvalidArgument;
        };
        let basis = match BasisSet::build(kind, n_funcs, mesh) {
            Ok(b) => b,
            Err(_) => return NvxStatus::InvalidArgument,
        };
        let solver = Box::new(NvxSolver {
            params,
            basis,
            settings: SolverSettings::default(),
        });
        unsafe { *out = Box::into_raw(solver) };
        NvxStatus::Ok
    })
}

/// # Safety
/// `solver` must be a handle from [`nvx_solver_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nvx_solver_free(solver: *mut NvxSolver) {
    if !solver.is_null() {
        drop(unsafe { Box::from_raw(solver) });
    }
}

/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nvx_solver_set_seed(solver: *mut NvxSolver, seed: u64) -> NvxStatus {
    let Some(s) = (unsafe { solver.as_mut() }) else {
        return NvxStatus::InvalidArgument;
    };
    s.settings.seed = seed;
    NvxStatus::Ok
}

/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nvx_solver_set_restarts(
    solver: *mut NvxSolver,
    restarts: u32,
) -> NvxStatus {
    let Some(s) = (unsafe { solver.as_mut() }) else {
        return NvxStatus::InvalidArgument;
    };
    if restarts == 0 {
        return NvxStatus::InvalidArgument;
    }
    s.settings.restarts = restarts;
    NvxStatus::Ok
}

/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nvx_solver_set_tolerance(
    solver: *mut NvxSolver,
    grad_tol: f64,
) -> NvxStatus {
    let Some(s) = (unsafe { solver.as_mut() }) else {
        return NvxStatus::InvalidArgument;
    };
    if grad_tol.is_nan() || grad_tol <= 0.0 {
        return NvxStatus::InvalidArgument;
    }
    s.settings.grad_tol = grad_tol;
    NvxStatus::Ok
}

fn deliver(out: *mut *mut NvxSolution, outcome: Result<SolveResult, SolveError>) -> NvxStatus {
    match outcome {
        Ok(result) => {
            unsafe { *out = Box::into_raw(Box::new(NvxSolution { result })) };
            NvxStatus::Ok
        }
        Err(SolveError::NotConverged { best, .. }) => {
            unsafe { *out = Box::into_raw(Box::new(NvxSolution { result: *best })) };
            NvxStatus::NotConverged
        }
        Err(err) => status_of(&err),
    }
}

/// Minimize the action at prescribed flux `q0`; κ is recovered. On
/// `NotConverged` the best iterate is still written to `out`.
///
/// # Safety
/// `solver` must be a live handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nvx_solve_flux(
    solver: *const NvxSolver,
    q0: f64,
    out: *mut *mut NvxSolution,
) -> NvxStatus {
    let Some(s) = (unsafe { solver.as_ref() }) else {
        return NvxStatus::InvalidArgument;
    };
    if out.is_null() {
        return NvxStatus::InvalidArgument;
    }
    guard(|| {
        deliver(
            out,
            optimizer::minimize_sphere(q0, &s.params, &s.basis, &s.settings),
        )
    })
}

/// Fixed-κ Nehari solve; the flux is an output.
///
/// # Safety
/// `solver` must be a live handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn nvx_solve_kappa(
    solver: *const NvxSolver,
    kappa: f64,
    out: *mut *mut NvxSolution,
) -> NvxStatus {
    let Some(s) = (unsafe { solver.as_ref() }) else {
        return NvxStatus::InvalidArgument;
    };
    if out.is_null() {
        return NvxStatus::InvalidArgument;
    }
    guard(|| {
        deliver(
            out,
            optimizer::minimize_nehari(kappa, &s.params, &s.basis, &s.settings),
        )
    })
}

/// # Safety
/// `solution` must come from a solve call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_free(solution: *mut NvxSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Recovered propagation constant κ (NaN on a null handle).
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_kappa(solution: *const NvxSolution) -> f64 {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.kappa,
        None => f64::NAN,
    }
}

/// Achieved energy flux Q(u) (NaN on a null handle).
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_flux(solution: *const NvxSolution) -> f64 {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.flux,
        None => f64::NAN,
    }
}

/// Action value I(u) (NaN on a null handle).
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_action(solution: *const NvxSolution) -> f64 {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.action,
        None => f64::NAN,
    }
}

/// Strong residual of the n-vortex equation (NaN on a null handle).
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_residual(solution: *const NvxSolution) -> f64 {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.residual,
        None => f64::NAN,
    }
}

/// Whether the solve met its gradient tolerance (false on null).
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_converged(solution: *const NvxSolution) -> bool {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.converged,
        None => false,
    }
}

/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_iterations(solution: *const NvxSolution) -> u64 {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.iterations as u64,
        None => 0,
    }
}

/// Number of basis coefficients in the solution.
///
/// # Safety
/// `solution` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_coeff_count(solution: *const NvxSolution) -> usize {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.coeffs().len(),
        None => 0,
    }
}

/// Copy the coefficient vector into a caller buffer of length `len`
/// (which must match `nvx_solution_coeff_count`).
///
/// # Safety
/// `buffer` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_coeffs(
    solution: *const NvxSolution,
    buffer: *mut f64,
    len: usize,
) -> NvxStatus {
    let Some(s) = (unsafe { solution.as_ref() }) else {
        return NvxStatus::InvalidArgument;
    };
    let coeffs = s.result.coeffs();
    if buffer.is_null() || len != coeffs.len() {
        return NvxStatus::InvalidArgument;
    }
    unsafe { std::ptr::copy_nonoverlapping(coeffs.as_ptr(), buffer, len) };
    NvxStatus::Ok
}

/// Evaluate the solution amplitude `u(r)`.
///
/// # Safety
/// `solution` must be a live handle or null (null returns NaN).
#[no_mangle]
pub unsafe extern "C" fn nvx_solution_eval(solution: *const NvxSolution, r: f64) -> f64 {
    match unsafe { solution.as_ref() } {
        Some(s) => s.result.field().eval(r),
        None => f64::NAN,
    }
}

/// Closed-form bounds for one parameter set. Pass `kappa` as a pointer so
/// it can be omitted (NULL); with no κ the κ-dependent thresholds use the
/// interval midpoint.
///
/// # Safety
/// `kappa` must be null or point to a double; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nvx_bounds_report(
    alpha: f64,
    winding: i32,
    radius: f64,
    q0: f64,
    kappa: *const f64,
    out: *mut NvxBoundsReport,
) -> NvxStatus {
    if out.is_null() {
        return NvxStatus::InvalidArgument;
    }
    guard(|| {
        let Ok(params) = Params::new(alpha, winding, radius) else {
            return NvxStatus::InvalidArgument;
        };
        let kappa_opt = unsafe { kappa.as_ref() }.copied();
        match bounds::bounds_report(&params, q0, kappa_opt) {
            Ok(rep) => {
                unsafe {
                    *out = NvxBoundsReport {
                        r0: rep.r0,
                        kappa_lower: rep.kappa_lower,
                        kappa_upper: rep.kappa_upper,
                        sigma: rep.sigma.unwrap_or(f64::NAN),
                        winding_negative: rep.winding_negative,
                        small_flux_excluded: rep.small_flux_excluded,
                        r_indefinite: rep.r_indefinite,
                        r_nehari: rep.r_nehari,
                        kappa_interval_lo: rep.kappa_interval.0,
                        kappa_interval_hi: rep.kappa_interval.1,
                    }
                };
                NvxStatus::Ok
            }
            Err(_) => NvxStatus::InvalidArgument,
        }
    })
}

/// Energy flux of the shooting oracle's ground profile at fixed κ.
///
/// # Safety
/// `out_flux` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn nvx_oracle_flux(
    alpha: f64,
    winding: i32,
    radius: f64,
    kappa: f64,
    out_flux: *mut f64,
) -> NvxStatus {
    if out_flux.is_null() {
        return NvxStatus::InvalidArgument;
    }
    guard(|| {
        let Ok(params) = Params::new(alpha, winding, radius) else {
            return NvxStatus::InvalidArgument;
        };
        match oracle::profile_for_kappa(kappa, &params) {
            Ok(profile) => {
                unsafe { *out_flux = profile.flux() };
                NvxStatus::Ok
            }
            Err(oracle::OracleError::NoBracket { .. }) => NvxStatus::NoBracket,
            Err(_) => NvxStatus::Numerical,
        }
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn nvx_status_message(status: NvxStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        NvxStatus::Ok => b"ok\0",
        NvxStatus::InvalidArgument => b"invalid argument\0",
        NvxStatus::Numerical => b"numerical failure\0",
        NvxStatus::NotConverged => b"solver did not converge\0",
        NvxStatus::NoBracket => b"no shooting bracket found\0",
        NvxStatus::Unsupported => b"unsupported configuration\0",
        NvxStatus::Internal => b"internal error (caught panic)\0",
    };
    msg.as_ptr() as *const c_char
}
