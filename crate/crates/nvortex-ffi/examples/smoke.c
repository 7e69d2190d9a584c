/*
 * Minimal C consumer of the nvortex C API.
 *
 * Build (from the repository root, after `cargo build -p nvortex-ffi`):
 *   gcc -std=c99 -I crates/nvortex-ffi/include crates/nvortex-ffi/examples/smoke.c \
 *       target/debug/libnvortex_ffi.a -lm -lpthread -ldl -o smoke
 */
#include <stdio.h>
#include <math.h>
#include "nvortex.h"

int main(void) {
    NvxSolver *solver = NULL;
    NvxStatus st = nvx_solver_new(0.1, 1, 8.0, 0, 16, 128, &solver);
    if (st != NVX_STATUS_OK) { fprintf(stderr, "solver_new: %d\n", st); return 1; }
    nvx_solver_set_restarts(solver, 1);

    NvxSolution *sol = NULL;
    st = nvx_solve_flux(solver, 10.0, &sol);
    if (st != NVX_STATUS_OK) { fprintf(stderr, "solve: %d\n", st); return 1; }
    double kappa = nvx_solution_kappa(sol);
    double flux = nvx_solution_flux(sol);
    if (fabs(kappa + 0.033) > 0.02) { fprintf(stderr, "kappa %f\n", kappa); return 1; }
    if (fabs(flux - 10.0) > 1e-6) { fprintf(stderr, "flux %f\n", flux); return 1; }

    NvxBoundsReport report;
    st = nvx_bounds_report(0.1, 1, 8.0, 40.0, NULL, &report);
    if (st != NVX_STATUS_OK || fabs(report.kappa_upper - 9.9470) > 5e-5) {
        fprintf(stderr, "bounds: %d upper %f\n", st, report.kappa_upper);
        return 1;
    }

    printf("c-smoke ok: kappa=%.4f flux=%.4f upper=%.4f (%s)\n",
           kappa, flux, report.kappa_upper, nvx_status_message(st));
    nvx_solution_free(sol);
    nvx_solver_free(solver);
    return 0;
}
