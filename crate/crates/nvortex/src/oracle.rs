//! Independent shooting-method solver for the n-vortex ODE at fixed κ.
//!
//! The boundary-value problem is recast as an initial-value problem: near
//! the core the linearized equation has the Frobenius solution
//! `u ≈ c·r^|n|`, so integration starts at `r = εR` with that series and a
//! free core slope `c`. The far boundary `u(R) = 0` is enforced by
//! bisecting on `c`: small-amplitude shots stay positive through `R`,
//! over-driven shots cross zero inside `(0, R)`, and the ground
//! ring profile sits exactly on the transition. Shots that cross zero in
//! the interior belong to excited branches and are rejected outright.
//!
//! This path shares no code with the variational solver — classical RK4
//! with fixed steps against quadrature-free Simpson integrals — which is
//! what makes it useful as a cross-check: a variational `(u, κ)` pair is
//! confirmed when the shot at the same κ reproduces its flux and profile.

use thiserror::Error;

use crate::model::Params;

/// Start offset as a fraction of R; the one-term core series at `εR` is
/// accurate to `O(ε²R²)`.
const START_EPSILON: f64 = 1e-6;
/// Amplitudes beyond this are treated as a diverged shot.
const DIVERGENCE_CAP: f64 = 1e8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("shot diverged at r = {at_radius:.6}: |u| exceeded {DIVERGENCE_CAP:.1e}")]
    Overflow { at_radius: f64 },
    #[error("no sign change in u(R) over core slopes [{lo:.3e}, {hi:.3e}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("invalid argument: {0}")]
    Config(String),
}

/// One integrated profile `u(r)` for a fixed κ and core slope.
#[derive(Debug, Clone)]
pub struct ShootProfile {
    kappa: f64,
    core_slope: f64,
    radii: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl ShootProfile {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Coefficient of the `r^|n|` core asymptote.
    pub fn core_slope(&self) -> f64 {
        self.core_slope
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// Terminal value `u(R)`.
    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    /// Energy flux `2π ∫ r u² dr` by composite Simpson over the sample
    /// grid (the sliver `[0, εR]` contributes `O(ε⁴)` and is dropped).
    pub fn flux(&self) -> f64 {
        let f: Vec<f64> = self
            .radii
            .iter()
            .zip(&self.values)
            .map(|(&r, &u)| r * u * u)
            .collect();
        2.0 * std::f64::consts::PI * simpson(&self.radii, &f)
    }

    /// Cubic Hermite interpolation through the samples; the region below
    /// the start offset uses the core series.
    pub fn eval(&self, r: f64, p: &Params) -> f64 {
        let r0 = self.radii[0];
        if r <= 0.0 {
            return 0.0;
        }
        if r <= r0 {
            return self.core_slope * r.powi(p.winding().abs());
        }
        let last = *self.radii.last().unwrap();
        if r >= last {
            return self.terminal();
        }
        let h = self.radii[1] - self.radii[0];
        let i = (((r - r0) / h) as usize).min(self.radii.len() - 2);
        let t = (r - self.radii[i]) / h;
        let (u0, u1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * h * d1
    }

    /// Relative mismatch of the integrated identity obtained by testing
    /// the equation against `u`:
    /// `-∫ r u'² = ∫ { (n²/r)u² + 2κ r u² - 2 r u⁴/(1+αu²) } dr`.
    pub fn integral_identity_error(&self, p: &Params) -> f64 {
        let alpha = p.alpha();
        let n2 = (p.winding() as f64).powi(2);
        let lhs_f: Vec<f64> = self
            .radii
            .iter()
            .zip(&self.derivs)
            .map(|(&r, &du)| r * du * du)
            .collect();
        let rhs_f: Vec<f64> = self
            .radii
            .iter()
            .zip(&self.values)
            .map(|(&r, &u)| {
                let u2 = u * u;
                n2 * u2 / r + 2.0 * self.kappa * r * u2 - 2.0 * r * u2 * u2 / (1.0 + alpha * u2)
            })
            .collect();
        let lhs = -simpson(&self.radii, &lhs_f);
        let rhs = simpson(&self.radii, &rhs_f);
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300)
    }
}

fn simpson(x: &[f64], f: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let h = x[1] - x[0];
    let mut total = 0.0;
    let pairs = (n - 1) / 2;
    for k in 0..pairs {
        let i = 2 * k;
        total += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    }
    if (n - 1) % 2 == 1 {
        // odd interval count: trapezoid on the last cell
        total += 0.5 * h * (f[n - 2] + f[n - 1]);
    }
    total
}

enum Outcome {
    /// positive through (0, R); carries the profile
    Completed(ShootProfile),
    /// crossed zero strictly inside (0, R)
    Crossed,
    Diverged {
        at_radius: f64,
    },
}

fn rhs(r: f64, u: f64, v: f64, p: &Params, kappa: f64) -> (f64, f64) {
    let n2 = p.winding_sq();
    let u2 = u * u;
    (
        v,
        -v / r + (n2 / (r * r) - 2.0 * u2 / (1.0 + p.alpha() * u2) + 2.0 * kappa) * u,
    )
}

/// One macro step of width `h` starting at `r`; the `n²/r²` coefficient
/// is stiff next to the core, so the first few macro steps are split into
/// substeps no longer than a small fraction of the local radius.
fn rk4_step(r: f64, u: &mut f64, v: &mut f64, h: f64, p: &Params, kappa: f64) {
    let substeps = ((h / (0.05 * r)).ceil() as usize).clamp(1, 8192);
    let hs = h / substeps as f64;
    let mut rr = r;
    for _ in 0..substeps {
        let (k1u, k1v) = rhs(rr, *u, *v, p, kappa);
        let (k2u, k2v) = rhs(
            rr + 0.5 * hs,
            *u + 0.5 * hs * k1u,
            *v + 0.5 * hs * k1v,
            p,
            kappa,
        );
        let (k3u, k3v) = rhs(
            rr + 0.5 * hs,
            *u + 0.5 * hs * k2u,
            *v + 0.5 * hs * k2v,
            p,
            kappa,
        );
        let (k4u, k4v) = rhs(rr + hs, *u + hs * k3u, *v + hs * k3v, p, kappa);
        *u += hs / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        *v += hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        rr += hs;
    }
}

fn integrate(kappa: f64, core_slope: f64, p: &Params, steps: usize) -> Outcome {
    let radius = p.radius();
    let order = p.winding().abs() as f64;
    let r_start = START_EPSILON * radius;
    let h = (radius - r_start) / steps as f64;

    let mut r = r_start;
    let mut u = core_slope * r.powf(order);
    let mut v = order * core_slope * r.powf(order - 1.0);
    let mut radii = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut derivs = Vec::with_capacity(steps + 1);
    radii.push(r);
    values.push(u);
    derivs.push(v);

    for i in 0..steps {
        rk4_step(r, &mut u, &mut v, h, p, kappa);
        r = r_start + (i + 1) as f64 * h;
        radii.push(r);
        values.push(u);
        derivs.push(v);
        if !u.is_finite() || u.abs() > DIVERGENCE_CAP {
            return Outcome::Diverged { at_radius: r };
        }
        if u < 0.0 && i + 1 < steps {
            return Outcome::Crossed;
        }
    }
    Outcome::Completed(ShootProfile {
        kappa,
        core_slope,
        radii,
        values,
        derivs,
    })
}

/// Integrate one shot from the core series `u = c·r^|n|` at `r = εR`.
/// Divergence is an error (the bisection uses it as a sign); interior zero
/// crossings still return the truncated-at-crossing classification via
/// [`profile_for_kappa`], but a direct `shoot` call reports the profile as
/// integrated.
pub fn shoot(
    kappa: f64,
    core_slope: f64,
    p: &Params,
    steps: usize,
) -> Result<ShootProfile, OracleError> {
    if core_slope < 0.0 {
        return Err(OracleError::Config(format!(
            "core slope must be nonnegative, got {core_slope}"
        )));
    }
    if steps < 16 {
        return Err(OracleError::Config(format!(
            "need at least 16 integration steps, got {steps}"
        )));
    }
    match integrate(kappa, core_slope, p, steps) {
        Outcome::Completed(profile) => Ok(profile),
        Outcome::Crossed => {
            // a crossing shot is still a valid integration; rerun without
            // the early exit so the caller sees the whole curve
            Ok(integrate_full(kappa, core_slope, p, steps)?)
        }
        Outcome::Diverged { at_radius } => Err(OracleError::Overflow { at_radius }),
    }
}

fn integrate_full(
    kappa: f64,
    core_slope: f64,
    p: &Params,
    steps: usize,
) -> Result<ShootProfile, OracleError> {
    let radius = p.radius();
    let order = p.winding().abs() as f64;
    let r_start = START_EPSILON * radius;
    let h = (radius - r_start) / steps as f64;
    let mut r = r_start;
    let mut u = core_slope * r.powf(order);
    let mut v = order * core_slope * r.powf(order - 1.0);
    let mut radii = vec![r];
    let mut values = vec![u];
    let mut derivs = vec![v];
    for i in 0..steps {
        rk4_step(r, &mut u, &mut v, h, p, kappa);
        r = r_start + (i + 1) as f64 * h;
        if !u.is_finite() || u.abs() > DIVERGENCE_CAP {
            return Err(OracleError::Overflow { at_radius: r });
        }
        radii.push(r);
        values.push(u);
        derivs.push(v);
    }
    Ok(ShootProfile {
        kappa,
        core_slope,
        radii,
        values,
        derivs,
    })
}

const SCAN_LO: f64 = 1e-8;
const SCAN_HI: f64 = 1e3;
const SCAN_POINTS: usize = 120;
const SCAN_STEPS: usize = 2048;
const REFINE_STEPS: usize = 8192;

fn shot_is_positive(kappa: f64, c: f64, p: &Params, steps: usize) -> bool {
    match integrate(kappa, c, p, steps) {
        Outcome::Completed(profile) => profile.terminal() > 0.0,
        Outcome::Crossed => false,
        // a diverged positive shot never crossed zero
        Outcome::Diverged { .. } => true,
    }
}

/// All sign-change brackets of `c ↦ sign(u(R))` over the logarithmic scan
/// range. The ground profile lives in the first; extra brackets would
/// indicate additional nodeless branches (none observed in practice).
pub fn scan_core_slope_brackets(kappa: f64, p: &Params) -> Vec<(f64, f64)> {
    let ratio = (SCAN_HI / SCAN_LO).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let mut out = Vec::new();
    let mut prev: Option<(f64, bool)> = None;
    let mut c = SCAN_LO;
    for _ in 0..SCAN_POINTS {
        let pos = shot_is_positive(kappa, c, p, SCAN_STEPS);
        if let Some((c_prev, pos_prev)) = prev {
            if pos_prev && !pos {
                out.push((c_prev, c));
            }
        }
        prev = Some((c, pos));
        c *= ratio;
    }
    out
}

/// The nodeless ground profile at fixed κ: bisect the core slope until the
/// shot grazes `u(R) = 0` without crossing zero inside.
pub fn profile_for_kappa(kappa: f64, p: &Params) -> Result<ShootProfile, OracleError> {
    let brackets = scan_core_slope_brackets(kappa, p);
    let Some(&(mut lo, mut hi)) = brackets.first() else {
        return Err(OracleError::NoBracket {
            lo: SCAN_LO,
            hi: SCAN_HI,
        });
    };
    for _ in 0..100 {
        let mid = (lo * hi).sqrt(); // geometric: c spans many decades
        if shot_is_positive(kappa, mid, p, REFINE_STEPS) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-15 {
            break;
        }
    }
    match integrate(kappa, lo, p, REFINE_STEPS) {
        Outcome::Completed(profile) => Ok(profile),
        // lo sat on the positive side during refinement; numerically this
        // cannot happen after the scan found it positive, but fail loudly
        Outcome::Crossed | Outcome::Diverged { .. } => Err(OracleError::NoBracket {
            lo: SCAN_LO,
            hi: SCAN_HI,
        }),
    }
}

/// One point of the κ ↦ Q(κ) curve; `flux` is `None` when no profile was
/// bracketed at that κ.
#[derive(Debug, Clone, Copy)]
pub struct FluxPoint {
    pub kappa: f64,
    pub flux: Option<f64>,
}

/// Tabulate the energy flux of the ground profile along a κ grid. Grid
/// points with no bracket are kept in the table with `flux: None`.
pub fn flux_of_kappa(grid: &[f64], p: &Params) -> Vec<FluxPoint> {
    grid.iter()
        .map(|&kappa| FluxPoint {
            kappa,
            flux: profile_for_kappa(kappa, p).ok().map(|prof| prof.flux()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params::new(0.1, 1, 8.0).unwrap()
    }

    #[test]
    fn zero_slope_gives_zero_profile() {
        let profile = shoot(1.0, 0.0, &params(), 4096).unwrap();
        assert!(profile.values().iter().all(|&u| u == 0.0));
        assert_eq!(profile.flux(), 0.0);
    }

    #[test]
    fn tiny_amplitude_matches_linear_bessel_mode() {
        // at κ = -j₁₁²/(2R²) the linearized mode J₁(√(-2κ) r) vanishes at R
        let j11 = crate::bounds::first_bessel_zero_of(1);
        let kappa = -j11 * j11 / 128.0;
        let profile = shoot(kappa, 1e-8, &params(), 8192).unwrap();
        let rel = profile.terminal().abs() / profile.max_value();
        assert!(rel <= 1e-3, "linear-limit terminal ratio {rel:.2e}");
    }

    #[test]
    fn step_doubling_fourth_order_sanity() {
        let p = params();
        let a = shoot(1.4901, 1.0, &p, 4096).unwrap();
        let b = shoot(1.4901, 1.0, &p, 8192).unwrap();
        assert!(
            (a.terminal() - b.terminal()).abs() <= 1e-8,
            "u(R): {} vs {}",
            a.terminal(),
            b.terminal()
        );
    }

    #[test]
    fn shoot_rejects_bad_arguments() {
        let p = params();
        assert!(matches!(
            shoot(1.0, -1.0, &p, 4096),
            Err(OracleError::Config(_))
        ));
        assert!(matches!(
            shoot(1.0, 1.0, &p, 4),
            Err(OracleError::Config(_))
        ));
    }

    #[test]
    fn ground_profile_at_reference_kappa() {
        let profile = profile_for_kappa(1.4901, &params()).unwrap();
        let flux = profile.flux();
        assert!(
            (flux - 40.0).abs() / 40.0 < 0.02,
            "flux at κ=1.4901: {flux:.4}"
        );
        assert!(profile.terminal().abs() <= 1e-9 * profile.max_value());
        assert!(profile.values().iter().all(|&u| u >= 0.0));
    }

    #[test]
    fn flux_threshold_near_zero_kappa() {
        let profile = profile_for_kappa(0.0001, &params()).unwrap();
        let flux = profile.flux();
        assert!((flux - 13.6).abs() / 13.6 < 0.03, "flux at κ≈0: {flux:.4}");
    }

    #[test]
    fn flux_vanishes_toward_linear_limit() {
        let p = params();
        let f1 = profile_for_kappa(-0.114, &p).unwrap().flux();
        assert!(f1 < 0.2, "flux near the linear limit: {f1}");
        let f2 = profile_for_kappa(-0.10, &p).unwrap().flux();
        assert!(f2 > f1, "flux should shrink toward the limit: {f2} vs {f1}");
    }

    #[test]
    fn no_bracket_below_linear_limit() {
        // below -j₁₁²/(2R²) even the linear mode crosses zero inside (0,R)
        let err = profile_for_kappa(-0.2, &params()).unwrap_err();
        assert!(matches!(err, OracleError::NoBracket { .. }));
    }

    #[test]
    fn flux_curve_monotone_in_kappa() {
        let p = params();
        let grid = [-0.05, 0.5, 1.4901, 2.5, 3.812];
        let curve = flux_of_kappa(&grid, &p);
        let fluxes: Vec<f64> = curve.iter().map(|pt| pt.flux.unwrap()).collect();
        for w in fluxes.windows(2) {
            assert!(w[1] > w[0], "flux not monotone: {fluxes:?}");
        }
        assert!((fluxes[2] - 40.0).abs() / 40.0 < 0.02);
        assert!((fluxes[4] - 100.0).abs() / 100.0 < 0.02);
    }

    #[test]
    fn empty_grid_gives_empty_curve() {
        assert!(flux_of_kappa(&[], &params()).is_empty());
    }

    #[test]
    fn integral_identity_on_ground_profile() {
        let profile = profile_for_kappa(1.4901, &params()).unwrap();
        let err = profile.integral_identity_error(&params());
        assert!(err <= 1e-6, "integrated identity mismatch {err:.2e}");
    }

    #[test]
    fn single_bracket_for_reference_kappas() {
        let p = params();
        for kappa in [0.0001, 1.4901] {
            let brackets = scan_core_slope_brackets(kappa, &p);
            assert_eq!(brackets.len(), 1, "κ={kappa}: {brackets:?}");
        }
    }

    #[test]
    fn hermite_eval_matches_samples() {
        let p = params();
        let profile = profile_for_kappa(1.4901, &p).unwrap();
        let r = profile.radii()[1234];
        assert!((profile.eval(r, &p) - profile.values()[1234]).abs() < 1e-12);
        // midpoints stay close to the curve
        let rm = 0.5 * (profile.radii()[1234] + profile.radii()[1235]);
        let interp = profile.eval(rm, &p);
        assert!(interp.is_finite());
        assert!((interp - profile.values()[1234]).abs() < 1e-2);
    }
}
