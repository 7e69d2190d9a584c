//! Constrained minimization of the action over the discretized fields.
//!
//! Two solver entry points:
//!
//! * [`minimize_sphere`] — minimize `F(a) = I(Σ aⱼψⱼ)` over the sphere
//!   `Σ aⱼ² = Q₀` (prescribed energy flux). The propagation constant κ is
//!   recovered afterwards as the Lagrange multiplier of the constraint.
//! * [`minimize_nehari`] — fix κ inside its admissible interval and
//!   minimize `I_κ` over the Nehari manifold `{γ_κ(u) = 0}`; each
//!   direction is scaled onto the manifold by a bisection on `Γ(t, u)`
//!   ([`nehari_scale`]), and the flux comes out as a result.
//!
//! The iteration is projected gradient descent with Armijo backtracking
//! and radial retraction onto the constraint sphere. Two refinements keep
//! it fast and let it reach tight gradient tolerances: descent directions
//! are preconditioned with the (fixed) quadratic part of the action
//! `A = ∫ r ψᵢ'ψⱼ' + (n²/r) ψᵢψⱼ dr`, and once Armijo decreases fall
//! below what f64 can resolve in the objective, the solver switches to a
//! tangent-space Newton polish whose acceptance test uses the gradient
//! norm instead of objective differences. Armijo steps remain strictly
//! monotone in `F`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::basis::{BasisError, BasisSet, RadialField};
use crate::linalg;
use crate::model::{self, ModelError, Params};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(
        "solver did not converge: projected gradient {grad_norm:.3e} after {iterations} iterations"
    )]
    NotConverged {
        grad_norm: f64,
        iterations: usize,
        /// Best iterate found, fully post-processed.
        best: Box<SolveResult>,
    },
    #[error("no Nehari scaling: Gamma(0) = {gamma_zero:.6e}, Gamma(inf) = {gamma_limit:.6e} do not bracket a root")]
    NoSignChange { gamma_zero: f64, gamma_limit: f64 },
    #[error("kappa = {kappa} outside the admissible interval ({lo:.6}, {hi:.6})")]
    KappaOutsideInterval { kappa: f64, lo: f64, hi: f64 },
    #[error("core distance R = {radius} below the Nehari threshold {threshold:.6} for this kappa")]
    RadiusBelowThreshold { radius: f64, threshold: f64 },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Iteration controls. Defaults follow the solver's validated operating
/// point; all fields must stay positive (and `backtrack` inside (0,1)).
#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub max_iters: usize,
    /// Convergence threshold on the projected-gradient norm.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    /// Number of solve attempts; attempt 0 is the deterministic initial
    /// guess, later ones perturb it.
    pub restarts: u32,
    pub seed: u64,
    /// Bisection tolerance on |Γ(t, u)| for the Nehari scaling.
    pub nehari_bisect_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_iters: 5000,
            grad_tol: 1e-8,
            armijo_c: 1e-4,
            backtrack: 0.5,
            restarts: 4,
            seed: 0,
            nehari_bisect_tol: 1e-12,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.max_iters == 0 {
            return Err(SolveError::Config("max_iters must be positive".into()));
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("armijo_c", self.armijo_c),
            ("nehari_bisect_tol", self.nehari_bisect_tol),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(SolveError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(SolveError::Config(format!(
                "backtrack factor must lie in (0,1), got {}",
                self.backtrack
            )));
        }
        if self.restarts == 0 {
            return Err(SolveError::Config("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// A converged (or best-effort) solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    field: RadialField,
    /// Propagation constant recovered from the weak form.
    pub kappa: f64,
    /// Action value `I(u)`.
    pub action: f64,
    /// Strong residual of the n-vortex equation.
    pub residual: f64,
    /// Achieved energy flux `Q(u)`.
    pub flux: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Which restart produced this minimum.
    pub restart_index: u32,
}

impl SolveResult {
    pub fn field(&self) -> &RadialField {
        &self.field
    }

    pub fn coeffs(&self) -> &[f64] {
        self.field.coeffs()
    }
}

/// Per-iteration record used by the invariant tests.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub objective: f64,
    pub grad_norm: f64,
    /// |‖a‖² - Q₀| after retraction.
    pub radius_error: f64,
    /// Whether this step was accepted by the Armijo test (Newton-polish
    /// steps are accepted on gradient decrease instead).
    pub armijo_step: bool,
}

// ──────────────────────── shared machinery ────────────────────────

struct Discretization {
    basis: Arc<BasisSet>,
    p: Params,
    n: usize,
    nq: usize,
    /// w_q r_q
    wr: Vec<f64>,
    /// w_q / r_q
    w_over_r: Vec<f64>,
    /// Cholesky factor of A = stiffness + centrifugal (preconditioner).
    precond: Vec<f64>,
    /// A itself (for Newton systems).
    quad_form: Vec<f64>,
}

impl Discretization {
    fn new(basis: &Arc<BasisSet>, p: &Params) -> Result<Self, SolveError> {
        let mesh = basis.mesh();
        let n = basis.len();
        let nq = mesh.quad_points().len();
        let wr: Vec<f64> = mesh
            .quad_weights()
            .iter()
            .zip(mesh.quad_points())
            .map(|(&w, &r)| w * r)
            .collect();
        let w_over_r: Vec<f64> = mesh
            .quad_weights()
            .iter()
            .zip(mesh.quad_points())
            .map(|(&w, &r)| w / r)
            .collect();

        let vals = basis.values_table();
        let ders = basis.derivs_table();
        let n2 = p.winding_sq();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for q in 0..nq {
                    s += wr[q] * ders[i * nq + q] * ders[j * nq + q]
                        + n2 * w_over_r[q] * vals[i * nq + q] * vals[j * nq + q];
                }
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        let mut chol = a.clone();
        linalg::cholesky_in_place(&mut chol, n, 1e-14)
            .map_err(|e| SolveError::Config(format!("quadratic form not SPD: {e}")))?;
        Ok(Discretization {
            basis: Arc::clone(basis),
            p: *p,
            n,
            nq,
            wr,
            w_over_r,
            precond: chol,
            quad_form: a,
        })
    }

    fn samples(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let u = linalg::coeffs_times_table(self.basis.values_table(), self.n, self.nq, coeffs);
        let du = linalg::coeffs_times_table(self.basis.derivs_table(), self.n, self.nq, coeffs);
        (u, du)
    }

    /// `F(a) = I(u)` in the log form, with its exact gradient.
    fn objective_grad(&self, coeffs: &[f64]) -> (f64, Vec<f64>) {
        let (u, du) = self.samples(coeffs);
        let alpha = self.p.alpha();
        let n2 = self.p.winding_sq();
        let mut f = 0.0;
        let mut kin_flux = vec![0.0; self.nq]; // wr·du for the gradient
        let mut zonal = vec![0.0; self.nq];
        for q in 0..self.nq {
            let (uq, duq) = (u[q], du[q]);
            let u2 = uq * uq;
            let sat = 1.0 + alpha * u2;
            f += self.wr[q]
                * (duq * duq - 2.0 / alpha * u2 + 2.0 / (alpha * alpha) * (alpha * u2).ln_1p())
                + self.w_over_r[q] * n2 * u2;
            kin_flux[q] = self.wr[q] * duq;
            zonal[q] = self.w_over_r[q] * n2 * uq - 2.0 * self.wr[q] * uq * u2 / sat;
        }
        f *= 0.5;
        let mut grad =
            linalg::table_times_nodes(self.basis.derivs_table(), self.n, self.nq, &kin_flux);
        let zpart = linalg::table_times_nodes(self.basis.values_table(), self.n, self.nq, &zonal);
        for (g, z) in grad.iter_mut().zip(&zpart) {
            *g += z;
        }
        (f, grad)
    }

    /// Gradient of `I_κ` at the given coefficients:
    /// `∇I_κ = ∇I + (κ/π) a` in the orthonormal basis.
    fn gradient_kappa(&self, coeffs: &[f64], kappa: f64) -> Vec<f64> {
        let (_, mut g) = self.objective_grad(coeffs);
        for (gj, aj) in g.iter_mut().zip(coeffs) {
            *gj += kappa / std::f64::consts::PI * aj;
        }
        g
    }

    fn precond_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut d = rhs.to_vec();
        linalg::cholesky_solve(&self.precond, self.n, &mut d);
        d
    }

    /// Curvature matrix of the saturable part: `Σ_q wr_q c(u_q) ψᵢψⱼ`.
    fn weighted_mass(&self, node_coeff: &[f64]) -> Vec<f64> {
        let vals = self.basis.values_table();
        let n = self.n;
        let nq = self.nq;
        let mut m = vec![0.0; n * n];
        for q in 0..nq {
            let c = node_coeff[q];
            if c == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = vals[i * nq + q];
                if vi == 0.0 {
                    continue;
                }
                let cvi = c * vi;
                for j in i..n {
                    m[i * n + j] += cvi * vals[j * nq + q];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                m[i * n + j] = m[j * n + i];
            }
        }
        m
    }
}

fn retract(mut a: Vec<f64>, q0: f64) -> Vec<f64> {
    let norm = linalg::norm(&a);
    let scale = q0.sqrt() / norm;
    for x in a.iter_mut() {
        *x *= scale;
    }
    a
}

fn project_tangent(g: &[f64], unit: &[f64]) -> Vec<f64> {
    let radial = linalg::dot(g, unit);
    g.iter()
        .zip(unit)
        .map(|(gj, uj)| gj - radial * uj)
        .collect()
}

/// Deterministic initial guess: the ring profile `r^|n| (R - r)`, which
/// matches the core asymptotics, projected into the basis.
fn initial_guess(basis: &Arc<BasisSet>, p: &Params) -> Result<Vec<f64>, SolveError> {
    let order = p.winding().unsigned_abs().min(12);
    let radius = basis.mesh().radius();
    let field = basis.project_fn(|r| (r / radius).powi(order as i32) * (radius - r))?;
    Ok(field.coeffs().to_vec())
}

fn perturbed(base: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = 0.3 * linalg::norm(base) / (base.len() as f64).sqrt();
    base.iter()
        .map(|&b| {
            // Box–Muller normal deviate
            let u1: f64 = rng.random_range(1e-12..1.0);
            let u2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            b + scale * (-2.0 * u1.ln()).sqrt() * u2.cos()
        })
        .collect()
}

// ──────────────────────── public operations ────────────────────────

/// `F(a) = I(Σ aⱼψⱼ)` and its analytic gradient
/// `∂F/∂aⱼ = ∫ { r u'ψⱼ' + (n²/r) u ψⱼ - 2 r u³ ψⱼ/(1+αu²) } dr`.
pub fn objective_and_gradient(
    coeffs: &[f64],
    p: &Params,
    basis: &Arc<BasisSet>,
) -> Result<(f64, Vec<f64>), SolveError> {
    if coeffs.len() != basis.len() {
        return Err(SolveError::Basis(BasisError::Dimension {
            expected: basis.len(),
            got: coeffs.len(),
        }));
    }
    let field = basis.synthesize(coeffs)?;
    let fv = model::action(&field, p);
    // gradient via the quadrature tables (one pass)
    let disc_free = DiscFree {
        basis,
        nq: basis.mesh().quad_points().len(),
    };
    Ok((fv.value, disc_free.gradient(&field, p)))
}

/// The action evaluated through the integrated-by-parts route: the log
/// term is replaced by `-α⁻¹ ∫ r² u u' / (1 + αu²) dr` (the boundary
/// terms vanish since `u(0) = u(R) = 0`). Used as an independent check on
/// the default log-form objective.
pub fn objective_by_parts(
    coeffs: &[f64],
    p: &Params,
    basis: &Arc<BasisSet>,
) -> Result<f64, SolveError> {
    let field = basis.synthesize(coeffs)?;
    let mesh = basis.mesh();
    let r = mesh.quad_points();
    let w = mesh.quad_weights();
    let (u, du) = (field.values(), field.derivs());
    let alpha = p.alpha();
    let n2 = p.winding_sq();
    let mut quad = 0.0;
    let mut ibp = 0.0;
    for q in 0..r.len() {
        let u2 = u[q] * u[q];
        quad += w[q] * (r[q] * du[q] * du[q] + n2 * u2 / r[q] - 2.0 / alpha * r[q] * u2);
        ibp += w[q] * r[q] * r[q] * u[q] * du[q] / (1.0 + alpha * u2);
    }
    Ok(0.5 * quad - ibp / alpha)
}

// lightweight gradient helper shared with objective_and_gradient
struct DiscFree<'a> {
    basis: &'a Arc<BasisSet>,
    nq: usize,
}

impl DiscFree<'_> {
    fn gradient(&self, field: &RadialField, p: &Params) -> Vec<f64> {
        let mesh = self.basis.mesh();
        let r = mesh.quad_points();
        let w = mesh.quad_weights();
        let alpha = p.alpha();
        let n2 = p.winding_sq();
        let (u, du) = (field.values(), field.derivs());
        let mut kin = vec![0.0; self.nq];
        let mut zon = vec![0.0; self.nq];
        for q in 0..self.nq {
            let u2 = u[q] * u[q];
            kin[q] = w[q] * r[q] * du[q];
            zon[q] = w[q] * (n2 * u[q] / r[q] - 2.0 * r[q] * u[q] * u2 / (1.0 + alpha * u2));
        }
        let n = self.basis.len();
        let mut g = linalg::table_times_nodes(self.basis.derivs_table(), n, self.nq, &kin);
        let zp = linalg::table_times_nodes(self.basis.values_table(), n, self.nq, &zon);
        for (gj, z) in g.iter_mut().zip(&zp) {
            *gj += z;
        }
        g
    }
}

enum Phase {
    Descent,
    Polish,
}

struct Descent {
    coeffs: Vec<f64>,
    objective: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

/// Core sphere iteration; `log` captures per-iteration invariants.
fn descend_on_sphere(
    disc: &Discretization,
    start: Vec<f64>,
    q0: f64,
    settings: &SolverSettings,
    log: &mut Vec<IterationRecord>,
) -> Descent {
    let mut a = retract(start, q0);
    let (mut f, mut g) = disc.objective_grad(&a);
    let mut phase = Phase::Descent;
    let mut newton_rejected = false;
    let mut iterations = 0;
    let polish_trigger = 1e-3 * (1.0 + q0.sqrt());

    for it in 0..settings.max_iters {
        iterations = it;
        let norm_a = linalg::norm(&a);
        let unit: Vec<f64> = a.iter().map(|x| x / norm_a).collect();
        let pg = project_tangent(&g, &unit);
        let pgn = linalg::norm(&pg);
        log.push(IterationRecord {
            objective: f,
            grad_norm: pgn,
            radius_error: (norm_a * norm_a - q0).abs(),
            armijo_step: false,
        });
        if pgn <= settings.grad_tol {
            return Descent {
                coeffs: a,
                objective: f,
                grad_norm: pgn,
                iterations: it,
                converged: true,
            };
        }

        if matches!(phase, Phase::Polish) {
            match newton_sphere_step(disc, &a, &g, &pg, pgn, q0) {
                Some((a2, f2, g2)) => {
                    a = a2;
                    f = f2;
                    g = g2;
                    newton_rejected = false;
                    continue;
                }
                None => {
                    if newton_rejected {
                        break; // both phases stuck: stagnation
                    }
                    newton_rejected = true;
                    phase = Phase::Descent;
                }
            }
        }

        // preconditioned projected-gradient step with monotone Armijo
        let mut d = disc.precond_solve(&pg);
        d = project_tangent(&d, &unit);
        let mut dg = linalg::dot(&d, &pg);
        if dg <= 0.0 {
            d = pg.clone();
            dg = pgn * pgn;
        }
        let floor = 64.0 * f64::EPSILON * (1.0 + f.abs());
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-14 {
            let cand = retract(a.iter().zip(&d).map(|(x, dj)| x - t * dj).collect(), q0);
            let (fc, gc) = disc.objective_grad(&cand);
            if fc <= f - settings.armijo_c * t * dg {
                a = cand;
                f = fc;
                g = gc;
                accepted = true;
                if let Some(rec) = log.last_mut() {
                    rec.armijo_step = true;
                }
                break;
            }
            if settings.armijo_c * t * dg < floor {
                break; // decrease no longer resolvable in f64
            }
            t *= settings.backtrack;
        }
        if accepted {
            newton_rejected = false;
            if pgn <= polish_trigger {
                phase = Phase::Polish;
            }
        } else {
            if newton_rejected {
                break;
            }
            phase = Phase::Polish;
        }
    }

    let norm_a = linalg::norm(&a);
    let unit: Vec<f64> = a.iter().map(|x| x / norm_a).collect();
    let pgn = linalg::norm(&project_tangent(&g, &unit));
    Descent {
        coeffs: a,
        objective: f,
        grad_norm: pgn,
        iterations,
        converged: pgn <= settings.grad_tol,
    }
}

/// One tangent-space Newton step on the sphere: solves the bordered KKT
/// system with the Hessian of the Lagrangian, accepts on a gradient-norm
/// decrease (no objective comparison, so it works below the Armijo
/// resolution floor).
fn newton_sphere_step(
    disc: &Discretization,
    a: &[f64],
    g: &[f64],
    pg: &[f64],
    pgn: f64,
    q0: f64,
) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let n = disc.n;
    let (u, _) = disc.samples(a);
    let alpha = disc.p.alpha();
    let curvature: Vec<f64> = u
        .iter()
        .zip(&disc.wr)
        .map(|(&uq, &wrq)| {
            let u2 = uq * uq;
            let sat = 1.0 + alpha * u2;
            -wrq * (6.0 * u2 + 2.0 * alpha * u2 * u2) / (sat * sat)
        })
        .collect();
    let s = disc.weighted_mass(&curvature);
    let theta = linalg::dot(g, a) / (2.0 * linalg::dot(a, a));
    let norm_a = linalg::norm(a);

    // bordered system [H - 2θI, â; âᵀ, 0]
    let dim = n + 1;
    let mut m = vec![0.0; dim * dim];
    for i in 0..n {
        for j in 0..n {
            let mut v = disc.quad_form[i * n + j] + s[i * n + j];
            if i == j {
                v -= 2.0 * theta;
            }
            m[i * dim + j] = v;
        }
        m[i * dim + n] = a[i] / norm_a;
        m[n * dim + i] = a[i] / norm_a;
    }
    let mut rhs = vec![0.0; dim];
    rhs[..n].copy_from_slice(pg);
    linalg::lu_solve_in_place(&mut m, dim, &mut rhs).ok()?;
    let d = &rhs[..n];

    let mut t = 1.0;
    for _ in 0..25 {
        let cand = retract(a.iter().zip(d).map(|(x, dj)| x - t * dj).collect(), q0);
        let (fc, gc) = disc.objective_grad(&cand);
        let norm_c = linalg::norm(&cand);
        let unit: Vec<f64> = cand.iter().map(|x| x / norm_c).collect();
        let pgn_c = linalg::norm(&project_tangent(&gc, &unit));
        if pgn_c <= (1.0 - 0.25 * t) * pgn {
            return Some((cand, fc, gc));
        }
        t *= 0.5;
    }
    None
}

fn post_process(
    disc: &Discretization,
    coeffs: Vec<f64>,
    q0: f64,
    iterations: usize,
    converged: bool,
    restart_index: u32,
) -> Result<SolveResult, SolveError> {
    let mut field = disc.basis.synthesize(&coeffs)?;
    // canonicalize the ± pair to the nonnegative representative
    let cubic: f64 = field
        .values()
        .iter()
        .zip(&disc.wr)
        .map(|(&u, &wr)| wr * u * u * u)
        .sum();
    if cubic < 0.0 {
        field = field.scaled(-1.0);
    }
    // A genuinely mixed-sign iterate is replaced by |u| and reprojected.
    // Dips below the relative threshold are truncation ripple in the
    // basis representation of the exponentially small tail, and the |u|
    // kink would only amplify them.
    let peak = field.max_value();
    if field.values().iter().any(|&u| u < -1e-6 * peak) {
        let absed: Vec<f64> = field.values().iter().map(|u| u.abs()).collect();
        let a = disc.basis.project(&absed)?;
        let a = retract(a, q0);
        field = disc.basis.synthesize(&a)?;
    }
    let p = disc.p;
    let kappa = model::kappa_from_field(&field, &p, q0)?;
    let action = model::action(&field, &p).value;
    let residual = model::strong_residual(&field, &p, kappa)?;
    let flux = model::energy_flux(&field);
    Ok(SolveResult {
        field,
        kappa,
        action,
        residual,
        flux,
        iterations,
        converged,
        restart_index,
    })
}

/// Minimize the action at prescribed flux `q0`; returns the lowest
/// converged minimum across restarts.
pub fn minimize_sphere(
    q0: f64,
    p: &Params,
    basis: &Arc<BasisSet>,
    settings: &SolverSettings,
) -> Result<SolveResult, SolveError> {
    minimize_sphere_logged(q0, p, basis, settings).map(|(res, _)| res)
}

/// As [`minimize_sphere`], also returning the iteration log of the
/// winning restart.
pub fn minimize_sphere_logged(
    q0: f64,
    p: &Params,
    basis: &Arc<BasisSet>,
    settings: &SolverSettings,
) -> Result<(SolveResult, Vec<IterationRecord>), SolveError> {
    settings.validate()?;
    if q0.is_nan() || q0 <= 0.0 {
        return Err(SolveError::Config(format!(
            "prescribed flux must be positive, got {q0}"
        )));
    }
    let disc = Discretization::new(basis, p)?;
    let base = initial_guess(basis, p)?;

    let mut best: Option<(Descent, u32, Vec<IterationRecord>)> = None;
    for attempt in 0..settings.restarts {
        let start = if attempt == 0 {
            base.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(attempt as u64));
            perturbed(&base, &mut rng)
        };
        let mut log = Vec::new();
        let run = descend_on_sphere(&disc, start, q0, settings, &mut log);
        let better = match &best {
            None => true,
            Some((cur, _, _)) => match (run.converged, cur.converged) {
                (true, false) => true,
                (false, true) => false,
                _ => run.objective < cur.objective,
            },
        };
        if better {
            best = Some((run, attempt, log));
        }
    }
    let (winner, index, log) = best.expect("at least one restart");
    let converged = winner.converged;
    let grad_norm = winner.grad_norm;
    let iterations = winner.iterations;
    let result = post_process(&disc, winner.coeffs, q0, iterations, converged, index)?;
    if converged {
        Ok((result, log))
    } else {
        Err(SolveError::NotConverged {
            grad_norm,
            iterations,
            best: Box::new(result),
        })
    }
}

// ──────────────────────── Nehari manifold ────────────────────────

/// Root of `Γ(·, u)` over precomputed samples. Returns `None` when the
/// bracket `Γ(0) > 0 > Γ(∞)` fails.
fn nehari_scale_samples(
    wr: &[f64],
    w_over_r: &[f64],
    u: &[f64],
    du: &[f64],
    p: &Params,
    kappa: f64,
    tol: f64,
) -> Result<f64, (f64, f64)> {
    let alpha = p.alpha();
    let n2 = p.winding_sq();
    let mut base = 0.0; // kin + centrifugal - 2(α⁻¹-κ)·flux
    for q in 0..u.len() {
        let u2 = u[q] * u[q];
        base += wr[q] * (du[q] * du[q] - 2.0 * (1.0 / alpha - kappa) * u2) + w_over_r[q] * n2 * u2;
    }
    let saturable = |t: f64| -> f64 {
        let t2 = t * t;
        let mut s = 0.0;
        for q in 0..u.len() {
            let u2 = u[q] * u[q];
            s += wr[q] * u2 / (1.0 + alpha * t2 * u2);
        }
        s
    };
    let gamma = |t: f64| 0.5 * (base + 2.0 / alpha * saturable(t));
    let gamma_zero = gamma(0.0);
    let gamma_inf = 0.5 * base;
    if !(gamma_zero > 0.0 && gamma_inf < 0.0) {
        return Err((gamma_zero, gamma_inf));
    }
    // Γ is non-increasing in t; expand then bisect.
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut safety = 0;
    while gamma(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        safety += 1;
        if safety > 200 {
            return Err((gamma_zero, gamma_inf));
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let g = gamma(mid);
        if g.abs() <= tol || (hi - lo) <= f64::EPSILON * hi {
            return Ok(mid);
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scale factor `t₀ > 0` placing `t₀·u` on the Nehari manifold:
/// `Γ(t₀, u) = 0`, so `γ_κ(t₀u) = t₀²Γ(t₀, u) = 0`. Requires the bracket
/// `Γ(0, u) > 0 > Γ(∞, u)`.
pub fn nehari_scale(u: &RadialField, p: &Params, kappa: f64, tol: f64) -> Result<f64, SolveError> {
    let mesh = u.mesh();
    let wr: Vec<f64> = mesh
        .quad_weights()
        .iter()
        .zip(mesh.quad_points())
        .map(|(&w, &r)| w * r)
        .collect();
    let w_over_r: Vec<f64> = mesh
        .quad_weights()
        .iter()
        .zip(mesh.quad_points())
        .map(|(&w, &r)| w / r)
        .collect();
    nehari_scale_samples(&wr, &w_over_r, u.values(), u.derivs(), p, kappa, tol).map_err(
        |(gamma_zero, gamma_limit)| SolveError::NoSignChange {
            gamma_zero,
            gamma_limit,
        },
    )
}

/// Newton iteration on `∇I_κ(a) = 0` (full coefficient space), used to
/// polish the Nehari outer loop. Accepts steps on gradient decrease.
fn newton_kappa_polish(
    disc: &Discretization,
    mut a: Vec<f64>,
    kappa: f64,
    tol: f64,
    max_steps: usize,
) -> (Vec<f64>, f64, usize) {
    let n = disc.n;
    let alpha = disc.p.alpha();
    let mut g = disc.gradient_kappa(&a, kappa);
    let mut gn = linalg::norm(&g);
    let mut steps = 0;
    for _ in 0..max_steps {
        if gn <= tol {
            break;
        }
        steps += 1;
        let (u, _) = disc.samples(&a);
        // curvature of the saturable term: d/du [u/(1+αu²)] = (1-αu²)/(1+αu²)²
        let curvature: Vec<f64> = u
            .iter()
            .zip(&disc.wr)
            .map(|(&uq, &wrq)| {
                let u2 = uq * uq;
                let sat = 1.0 + alpha * u2;
                2.0 / alpha * wrq * (1.0 - alpha * u2) / (sat * sat)
            })
            .collect();
        let w = disc.weighted_mass(&curvature);
        let shift = (1.0 / alpha - kappa) / std::f64::consts::PI;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = disc.quad_form[i * n + j] + w[i * n + j];
                if i == j {
                    v -= shift;
                }
                h[i * n + j] = v;
            }
        }
        let mut d = g.clone();
        if linalg::lu_solve_in_place(&mut h, n, &mut d).is_err() {
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = a.iter().zip(&d).map(|(x, dj)| x - t * dj).collect();
            let gc = disc.gradient_kappa(&cand, kappa);
            let gcn = linalg::norm(&gc);
            if gcn <= (1.0 - 0.25 * t) * gn {
                a = cand;
                g = gc;
                gn = gcn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (a, gn, steps)
}

/// Fixed-κ minimization of `I_κ` over the Nehari manifold. κ must lie in
/// the open interval `(-(n²+r₀²)/(2R²), α⁻¹-(n²+r₀²)/(2R²))` and R must
/// exceed the manifold's nonemptiness threshold. The flux `Q(u)` is an
/// output.
pub fn minimize_nehari(
    kappa: f64,
    p: &Params,
    basis: &Arc<BasisSet>,
    settings: &SolverSettings,
) -> Result<SolveResult, SolveError> {
    settings.validate()?;
    let r0 = crate::bounds::first_bessel_zero();
    let r2 = p.radius() * p.radius();
    let shift = (p.winding_sq() + r0 * r0) / (2.0 * r2);
    let (lo, hi) = (-shift, 1.0 / p.alpha() - shift);
    if !(kappa > lo && kappa < hi) {
        return Err(SolveError::KappaOutsideInterval { kappa, lo, hi });
    }
    let ln_factor = 1.0 + p.winding_sq() * (2.0 * std::f64::consts::LN_2 - 1.0);
    let threshold = (6.0 * ln_factor / (1.0 / p.alpha() - kappa)).sqrt();
    if p.radius() <= threshold {
        return Err(SolveError::RadiusBelowThreshold {
            radius: p.radius(),
            threshold,
        });
    }

    let disc = Discretization::new(basis, p)?;
    let base = initial_guess(basis, p)?;
    let tol0 = settings.nehari_bisect_tol;

    let mut best: Option<(Vec<f64>, f64, f64, usize, u32)> = None; // coeffs, J, gn, iters, attempt
    let mut first_bracket_failure: Option<(f64, f64)> = None;

    for attempt in 0..settings.restarts {
        let start = if attempt == 0 {
            base.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(attempt as u64));
            perturbed(&base, &mut rng)
        };
        let mut v = retract(start, 1.0);
        let (u0, du0) = disc.samples(&v);
        let t0 = match nehari_scale_samples(&disc.wr, &disc.w_over_r, &u0, &du0, p, kappa, tol0) {
            Ok(t) => t,
            Err(pair) => {
                first_bracket_failure.get_or_insert(pair);
                continue;
            }
        };
        let mut t_scale = t0;
        let scaled: Vec<f64> = v.iter().map(|x| t_scale * x).collect();
        let field = |c: &[f64]| -> (f64, Vec<f64>) {
            // I_κ and a placeholder; gradient computed separately
            let (u, du) = disc.samples(c);
            let alpha = p.alpha();
            let n2 = p.winding_sq();
            let mut val = 0.0;
            for q in 0..u.len() {
                let u2 = u[q] * u[q];
                val += disc.wr[q]
                    * (du[q] * du[q] - 2.0 * (1.0 / alpha - kappa) * u2
                        + 2.0 / (alpha * alpha) * (alpha * u2).ln_1p())
                    + disc.w_over_r[q] * n2 * u2;
            }
            (0.5 * val, u)
        };
        let (mut j_val, _) = field(&scaled);
        let mut iterations = 0;
        let mut stalled = false;

        for it in 0..settings.max_iters {
            iterations = it;
            let scaled: Vec<f64> = v.iter().map(|x| t_scale * x).collect();
            let mut g = disc.gradient_kappa(&scaled, kappa);
            for gj in g.iter_mut() {
                *gj *= t_scale;
            }
            let pg = project_tangent(&g, &v);
            let pgn = linalg::norm(&pg);
            if pgn <= settings.grad_tol || stalled {
                break;
            }
            let mut d = disc.precond_solve(&pg);
            d = project_tangent(&d, &v);
            let mut dg = linalg::dot(&d, &pg);
            if dg <= 0.0 {
                d = pg.clone();
                dg = pgn * pgn;
            }
            let floor = 64.0 * f64::EPSILON * (1.0 + j_val.abs());
            let mut t = 1.0;
            let mut accepted = false;
            while t >= 1e-14 {
                let cand = retract(v.iter().zip(&d).map(|(x, dj)| x - t * dj).collect(), 1.0);
                let (uc, duc) = disc.samples(&cand);
                if let Ok(tc) =
                    nehari_scale_samples(&disc.wr, &disc.w_over_r, &uc, &duc, p, kappa, tol0)
                {
                    let scaled_c: Vec<f64> = cand.iter().map(|x| tc * x).collect();
                    let (jc, _) = field(&scaled_c);
                    if jc <= j_val - settings.armijo_c * t * dg {
                        v = cand;
                        t_scale = tc;
                        j_val = jc;
                        accepted = true;
                        break;
                    }
                    if settings.armijo_c * t * dg < floor {
                        break;
                    }
                }
                t *= settings.backtrack;
            }
            if !accepted {
                stalled = true; // hand off to the Newton polish
            }
        }

        // polish in the full space, then rescale exactly onto the manifold
        let scaled: Vec<f64> = v.iter().map(|x| t_scale * x).collect();
        let (polished, gn, newton_steps) =
            newton_kappa_polish(&disc, scaled, kappa, settings.grad_tol, 80);
        let (up, dup) = disc.samples(&polished);
        let final_coeffs =
            match nehari_scale_samples(&disc.wr, &disc.w_over_r, &up, &dup, p, kappa, tol0) {
                Ok(tf) => polished.iter().map(|x| tf * x).collect::<Vec<f64>>(),
                Err(_) => polished,
            };
        let (j_final, _) = field(&final_coeffs);
        iterations += newton_steps;
        let better = match &best {
            None => true,
            Some((_, j_best, gn_best, _, _)) => {
                match (gn <= settings.grad_tol, *gn_best <= settings.grad_tol) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => j_final < *j_best,
                }
            }
        };
        if better {
            best = Some((final_coeffs, j_final, gn, iterations, attempt));
        }
    }

    let Some((coeffs, _, gn, iterations, attempt)) = best else {
        let (gamma_zero, gamma_limit) = first_bracket_failure.unwrap_or((0.0, 0.0));
        return Err(SolveError::NoSignChange {
            gamma_zero,
            gamma_limit,
        });
    };
    let converged = gn <= settings.grad_tol;
    let field = disc.basis.synthesize(&coeffs)?;
    let flux = model::energy_flux(&field);
    let mut result = SolveResult {
        kappa,
        action: model::action(&field, p).value,
        residual: model::strong_residual(&field, p, kappa)?,
        flux,
        iterations,
        converged,
        restart_index: attempt,
        field,
    };
    if flux > 0.0 {
        result.kappa = model::kappa_from_field(&result.field, p, flux)?;
    }
    if converged {
        Ok(result)
    } else {
        Err(SolveError::NotConverged {
            grad_norm: gn,
            iterations,
            best: Box::new(result),
        })
    }
}
