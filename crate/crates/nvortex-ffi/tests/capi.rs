//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use std::ptr;

use nvortex_ffi::*;

#[test]
fn solve_flux_through_the_c_surface() {
    unsafe {
        let mut solver: *mut NvxSolver = ptr::null_mut();
        let status = nvx_solver_new(0.1, 1, 8.0, 0, 16, 128, &mut solver);
        assert_eq!(status, NvxStatus::Ok);
        assert!(!solver.is_null());
        assert_eq!(nvx_solver_set_seed(solver, 7), NvxStatus::Ok);
        assert_eq!(nvx_solver_set_restarts(solver, 1), NvxStatus::Ok);

        let mut solution: *mut NvxSolution = ptr::null_mut();
        let status = nvx_solve_flux(solver, 10.0, &mut solution);
        assert_eq!(status, NvxStatus::Ok);
        assert!(nvx_solution_converged(solution));
        let kappa = nvx_solution_kappa(solution);
        assert!((kappa - (-0.033)).abs() < 0.02, "kappa = {kappa}");
        let flux = nvx_solution_flux(solution);
        assert!((flux - 10.0).abs() < 1e-6, "flux = {flux}");
        assert!(nvx_solution_residual(solution) < 0.05);
        assert!(nvx_solution_iterations(solution) > 0);

        assert_eq!(nvx_solution_coeff_count(solution), 16);
        let mut coeffs = vec![0.0f64; 16];
        assert_eq!(
            nvx_solution_coeffs(solution, coeffs.as_mut_ptr(), 16),
            NvxStatus::Ok
        );
        let sum: f64 = coeffs.iter().map(|c| c * c).sum();
        assert!((sum - 10.0).abs() < 1e-8, "sum of squares = {sum}");

        // the ring profile is positive in the middle, zero at the ends
        assert!(nvx_solution_eval(solution, 4.0) > 0.0);
        assert_eq!(nvx_solution_eval(solution, 0.0), 0.0);
        assert_eq!(nvx_solution_eval(solution, 8.0), 0.0);

        nvx_solution_free(solution);
        nvx_solver_free(solver);
    }
}

#[test]
fn nehari_solve_through_the_c_surface() {
    unsafe {
        let mut solver: *mut NvxSolver = ptr::null_mut();
        assert_eq!(
            nvx_solver_new(0.1, 1, 8.0, 0, 24, 256, &mut solver),
            NvxStatus::Ok
        );
        assert_eq!(nvx_solver_set_restarts(solver, 1), NvxStatus::Ok);
        let mut solution: *mut NvxSolution = ptr::null_mut();
        let status = nvx_solve_kappa(solver, 0.0712, &mut solution);
        assert_eq!(status, NvxStatus::Ok);
        let flux = nvx_solution_flux(solution);
        assert!((flux - 20.0).abs() / 20.0 < 0.05, "flux = {flux}");
        nvx_solution_free(solution);

        // kappa outside the admissible interval is rejected
        let mut rejected: *mut NvxSolution = ptr::null_mut();
        assert_eq!(
            nvx_solve_kappa(solver, 12.0, &mut rejected),
            NvxStatus::Unsupported
        );
        assert!(rejected.is_null());
        nvx_solver_free(solver);
    }
}

#[test]
fn invalid_arguments_are_reported() {
    unsafe {
        let mut solver: *mut NvxSolver = ptr::null_mut();
        assert_eq!(
            nvx_solver_new(-1.0, 1, 8.0, 0, 16, 128, &mut solver),
            NvxStatus::InvalidArgument
        );
        assert_eq!(
            nvx_solver_new(0.1, 0, 8.0, 0, 16, 128, &mut solver),
            NvxStatus::InvalidArgument
        );
        assert_eq!(
            nvx_solver_new(0.1, 1, 8.0, 9, 16, 128, &mut solver),
            NvxStatus::InvalidArgument
        );
        assert_eq!(
            nvx_solver_new(0.1, 1, 8.0, 0, 16, 128, ptr::null_mut()),
            NvxStatus::InvalidArgument
        );

        assert!(nvx_solution_kappa(ptr::null()).is_nan());
        assert_eq!(nvx_solution_coeff_count(ptr::null()), 0);
        assert_eq!(
            nvx_solver_set_seed(ptr::null_mut(), 1),
            NvxStatus::InvalidArgument
        );
        nvx_solution_free(ptr::null_mut());
        nvx_solver_free(ptr::null_mut());
    }
}

#[test]
fn bounds_report_c_struct() {
    unsafe {
        let mut report = std::mem::zeroed::<NvxBoundsReport>();
        let status = nvx_bounds_report(0.1, 1, 8.0, 40.0, ptr::null(), &mut report);
        assert_eq!(status, NvxStatus::Ok);
        assert!((report.kappa_upper - 9.9470).abs() < 5e-5);
        assert!((report.r0 - 2.404825557695773).abs() < 1e-9);
        assert!(report.sigma.is_nan(), "no kappa supplied");
        assert!(!report.winding_negative);

        let kappa = 1.4901;
        assert_eq!(
            nvx_bounds_report(0.1, 1, 8.0, 40.0, &kappa, &mut report),
            NvxStatus::Ok
        );
        assert!((report.sigma - (report.kappa_upper - kappa)).abs() < 1e-12);

        assert_eq!(
            nvx_bounds_report(0.1, 1, 8.0, -1.0, ptr::null(), &mut report),
            NvxStatus::InvalidArgument
        );
    }
}

#[test]
fn oracle_flux_through_the_c_surface() {
    unsafe {
        let mut flux = 0.0f64;
        assert_eq!(
            nvx_oracle_flux(0.1, 1, 8.0, 0.0001, &mut flux),
            NvxStatus::Ok
        );
        assert!((flux - 13.6).abs() / 13.6 < 0.03, "flux = {flux}");

        // below the linear limit there is no bracket
        assert_eq!(
            nvx_oracle_flux(0.1, 1, 8.0, -0.2, &mut flux),
            NvxStatus::NoBracket
        );
    }
}

#[test]
fn status_messages_are_static_strings() {
    for status in [
        NvxStatus::Ok,
        NvxStatus::InvalidArgument,
        NvxStatus::Numerical,
        NvxStatus::NotConverged,
        NvxStatus::NoBracket,
        NvxStatus::Unsupported,
        NvxStatus::Internal,
    ] {
        let ptr = nvx_status_message(status);
        assert!(!ptr.is_null());
        let text = unsafe { std::ffi::CStr::from_ptr(ptr) }.to_str().unwrap();
        assert!(!text.is_empty());
    }
}
