//! Continuous functionals of the saturable n-vortex problem.
//!
//! With `F(I) = I/(1 + αI)` saturable response, the stationary radial
//! amplitude extremizes the action
//!
//! ```text
//! I(u)   = ½ ∫ { r u'² + (n²/r) u² - 2α⁻¹ r u² + 2α⁻² r ln(1 + αu²) } dr,
//! I_κ(u) = I(u) + κ ∫ r u² dr,
//! ```
//!
//! under the energy-flux constraint `Q(u) = 2π ∫ r u² dr`. The Nehari
//! functional `γ_κ(u) = ½⟨I_κ'(u), u⟩` and its ray restriction
//! `Γ(t, u)` (with `γ_κ(tu) = t² Γ(t, u)`) drive the fixed-κ solver, and
//! the strong residual integrates the squared pointwise defect of the
//! Euler–Lagrange equation itself.
//!
//! Every functional is evaluated over the field's cached quadrature
//! samples in a single pass that also records the named partial integrals
//! (kinetic, centrifugal, flux, logarithmic, saturable), so bounds and
//! diagnostics reuse exactly the same numbers.
//!
//! The tent profile of half-width `a = R/2` is kept around because all of
//! its integrals have closed forms; it is the witness function behind the
//! κ lower bound and several cross-checks.

use std::f64::consts::PI;

use thiserror::Error;

use crate::basis::{BasisKind, BasisSet, Mesh, RadialField};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("basis has no second derivatives and smoothing is disabled")]
    UnsupportedBasis,
    #[error(transparent)]
    Basis(#[from] crate::basis::BasisError),
}

/// Physical parameters shared by every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    alpha: f64,
    winding: i32,
    radius: f64,
}

impl Params {
    /// `alpha` — saturation constant (> 0); `winding` — vortex winding
    /// number (|n| ≥ 1); `radius` — distance from the vortex core (> 0).
    pub fn new(alpha: f64, winding: i32, radius: f64) -> Result<Self, ModelError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(ModelError::Domain(format!(
                "saturation constant must be positive, got {alpha}"
            )));
        }
        if winding == 0 {
            return Err(ModelError::Domain(
                "vortex winding number must satisfy |n| >= 1".into(),
            ));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(ModelError::Domain(format!(
                "core distance must be positive, got {radius}"
            )));
        }
        Ok(Params {
            alpha,
            winding,
            radius,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn winding(&self) -> i32 {
        self.winding
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub(crate) fn winding_sq(&self) -> f64 {
        (self.winding as f64) * (self.winding as f64)
    }
}

/// Named partial integrals shared by the action-type functionals.
#[derive(Debug, Clone, Copy, Default)]
pub struct Breakdown {
    /// ∫ r u'² dr
    pub kinetic: f64,
    /// n² ∫ u²/r dr
    pub centrifugal: f64,
    /// ∫ r u² dr
    pub flux_integral: f64,
    /// ∫ r ln(1 + αu²) dr
    pub log_integral: f64,
    /// ∫ r u²/(1 + αu²) dr
    pub saturable_integral: f64,
}

/// A functional value together with the partial integrals it combines.
#[derive(Debug, Clone, Copy)]
pub struct FunctionalValue {
    pub value: f64,
    pub breakdown: Breakdown,
}

/// Quadrature view of a field: nodes, weights, samples.
pub(crate) struct Samples<'a> {
    pub r: &'a [f64],
    pub w: &'a [f64],
    pub u: &'a [f64],
    pub du: &'a [f64],
}

impl<'a> Samples<'a> {
    pub(crate) fn of(field: &'a RadialField) -> Self {
        let mesh = field.mesh();
        Samples {
            r: mesh.quad_points(),
            w: mesh.quad_weights(),
            u: field.values(),
            du: field.derivs(),
        }
    }

    fn sum(&self, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut s = 0.0;
        for q in 0..self.r.len() {
            s += self.w[q] * f(self.r[q], self.u[q], self.du[q]);
        }
        s
    }
}

pub(crate) fn breakdown_of(s: &Samples, p: &Params) -> Breakdown {
    let n2 = p.winding_sq();
    let alpha = p.alpha;
    let mut b = Breakdown::default();
    for q in 0..s.r.len() {
        let (r, u, du, w) = (s.r[q], s.u[q], s.du[q], s.w[q]);
        let u2 = u * u;
        b.kinetic += w * r * du * du;
        b.centrifugal += w * n2 * u2 / r;
        b.flux_integral += w * r * u2;
        b.log_integral += w * r * (alpha * u2).ln_1p();
        b.saturable_integral += w * r * u2 / (1.0 + alpha * u2);
    }
    b
}

/// Energy flux `Q(u) = 2π ∫ r u² dr`; equals `Σ aⱼ²` in an orthonormal
/// basis.
pub fn energy_flux(u: &RadialField) -> f64 {
    let s = Samples::of(u);
    2.0 * PI * s.sum(|r, u, _| r * u * u)
}

/// Action `I(u)`; its Euler–Lagrange equation under prescribed flux is the
/// n-vortex equation with `κ` as multiplier.
pub fn action(u: &RadialField, p: &Params) -> FunctionalValue {
    let b = breakdown_of(&Samples::of(u), p);
    let value = 0.5
        * (b.kinetic + b.centrifugal - 2.0 / p.alpha * b.flux_integral
            + 2.0 / (p.alpha * p.alpha) * b.log_integral);
    FunctionalValue {
        value,
        breakdown: b,
    }
}

/// Shifted action `I_κ(u) = I(u) + κ ∫ r u² dr = I(u) + κ Q(u)/(2π)`.
pub fn action_kappa(u: &RadialField, p: &Params, kappa: f64) -> FunctionalValue {
    let b = breakdown_of(&Samples::of(u), p);
    let value = 0.5
        * (b.kinetic + b.centrifugal - 2.0 * (1.0 / p.alpha - kappa) * b.flux_integral
            + 2.0 / (p.alpha * p.alpha) * b.log_integral);
    FunctionalValue {
        value,
        breakdown: b,
    }
}

/// Energy `E(u) = ½ ∫ { r u'² + u²/r + r ln(1+αu²) } dr`; finiteness is
/// the admissibility condition, guaranteed for basis fields.
pub fn energy(u: &RadialField, p: &Params) -> f64 {
    let s = Samples::of(u);
    let alpha = p.alpha;
    0.5 * s.sum(|r, u, du| r * du * du + u * u / r + r * (alpha * u * u).ln_1p())
}

/// Nehari functional `γ_κ(u) = ½⟨I_κ'(u), u⟩`; its zero set (minus the
/// origin) is the Nehari manifold.
pub fn gamma_kappa(u: &RadialField, p: &Params, kappa: f64) -> f64 {
    gamma_scaled(1.0, u, p, kappa)
}

/// Ray-scaled Nehari function `Γ(t, u)`, satisfying `γ_κ(tu) = t²Γ(t,u)`
/// and non-increasing in `t` (only the saturable term depends on `t`, and
/// it decreases).
pub fn gamma_scaled(t: f64, u: &RadialField, p: &Params, kappa: f64) -> f64 {
    let s = Samples::of(u);
    let alpha = p.alpha;
    let n2 = p.winding_sq();
    let t2 = t * t;
    0.5 * s.sum(|r, u, du| {
        let u2 = u * u;
        r * du * du + n2 * u2 / r - 2.0 * (1.0 / alpha - kappa) * r * u2
            + 2.0 / alpha * r * u2 / (1.0 + alpha * t2 * u2)
    })
}

/// `Γ(∞, u)`, the `t → ∞` limit of [`gamma_scaled`]: the saturable term
/// drops out. Evaluated in closed form to avoid a large-`t` proxy.
pub fn gamma_limit(u: &RadialField, p: &Params, kappa: f64) -> f64 {
    let s = Samples::of(u);
    let n2 = p.winding_sq();
    0.5 * s.sum(|r, u, du| r * du * du + n2 * u * u / r - 2.0 * (1.0 / p.alpha - kappa) * r * u * u)
}

/// Recover the propagation constant of a solution field with flux `q0`:
///
/// ```text
/// κ = -(π/Q₀) ∫ { r u'² + (n²/r) u² - 2 r u⁴/(1+αu²) } dr,
/// ```
///
/// the weak form of the n-vortex equation tested against `u` itself. The
/// caller is responsible for `energy_flux(u) ≈ q0`.
pub fn kappa_from_field(u: &RadialField, p: &Params, q0: f64) -> Result<f64, ModelError> {
    if q0.is_nan() || q0 <= 0.0 {
        return Err(ModelError::Domain(format!(
            "flux must be positive, got {q0}"
        )));
    }
    let s = Samples::of(u);
    let n2 = p.winding_sq();
    let alpha = p.alpha;
    let val = s.sum(|r, u, du| {
        let u2 = u * u;
        r * du * du + n2 * u2 / r - 2.0 * r * u2 * u2 / (1.0 + alpha * u2)
    });
    Ok(-PI / q0 * val)
}

/// Policy for strong residuals of bases without second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Resample through a spectral-sine projection on the same mesh.
    Auto,
    /// Fail with [`ModelError::UnsupportedBasis`] instead.
    Disabled,
}

/// Strong residual `∫ ((r u')' - (n²/r)u + 2ru³/(1+αu²) - 2κru)² dr`:
/// zero exactly when `u` solves the n-vortex equation with this `κ` on
/// the quadrature set. Uses [`Smoothing::Auto`] for hat fields.
pub fn strong_residual(u: &RadialField, p: &Params, kappa: f64) -> Result<f64, ModelError> {
    strong_residual_with(u, p, kappa, Smoothing::Auto)
}

pub fn strong_residual_with(
    u: &RadialField,
    p: &Params,
    kappa: f64,
    smoothing: Smoothing,
) -> Result<f64, ModelError> {
    let Some(d2u) = u.second_derivs() else {
        return match smoothing {
            Smoothing::Disabled => Err(ModelError::UnsupportedBasis),
            Smoothing::Auto => {
                let mesh = u.mesh().clone();
                let n_smooth = 64.min((mesh.n_cells().saturating_sub(1)).max(2));
                let smooth = BasisSet::build(BasisKind::SpectralSine, n_smooth, mesh)?;
                let coeffs = smooth.project(u.values())?;
                let resampled = smooth.synthesize(&coeffs)?;
                strong_residual_with(&resampled, p, kappa, Smoothing::Disabled)
            }
        };
    };
    let s = Samples::of(u);
    let n2 = p.winding_sq();
    let alpha = p.alpha;
    let mut total = 0.0;
    for (q, &ddu) in d2u.iter().enumerate() {
        let (r, uv, du) = (s.r[q], s.u[q], s.du[q]);
        let defect = du + r * ddu - n2 * uv / r + 2.0 * r * uv.powi(3) / (1.0 + alpha * uv * uv)
            - 2.0 * kappa * r * uv;
        total += s.w[q] * defect * defect;
    }
    Ok(total)
}

// ──────────────────────── tent profile ────────────────────────

/// Piecewise-linear tent of half-width `a = R/2` and peak `b`:
/// `u₀(r) = (b/a) r` on `[0, a]`, `(b/a)(2a - r)` on `[a, 2a]`.
#[derive(Debug, Clone, Copy)]
pub struct TentProfile {
    a_half: f64,
    b: f64,
}

/// The tent's four weighted integrals, all in closed form:
///
/// ```text
/// ∫ r u₀² dr      = (2/3) a² b²
/// ∫ r u₀'² dr     = 2 b²
/// ∫ u₀²/r dr      = 2 b² (2 ln 2 - 1)
/// ∫ r ln(1+αu₀²)  = 2a² ( ln(1+αb²) - 2 + (2/(√α b)) atan(√α b) )
/// ```
#[derive(Debug, Clone, Copy)]
pub struct TentIntegrals {
    /// ∫ r u₀² dr
    pub flux_integral: f64,
    /// ∫ r u₀'² dr
    pub kinetic: f64,
    /// ∫ u₀²/r dr (unit coefficient; multiply by n² for the centrifugal term)
    pub centrifugal_unit: f64,
    /// ∫ r ln(1 + α u₀²) dr
    pub log_integral: f64,
}

impl TentProfile {
    pub fn new(a_half: f64, b: f64) -> Result<Self, ModelError> {
        if a_half.is_nan() || a_half <= 0.0 {
            return Err(ModelError::Domain(format!(
                "tent half-width must be positive, got {a_half}"
            )));
        }
        Ok(TentProfile { a_half, b })
    }

    /// Tent scaled so its flux equals `q0` on `[0, R]`: `b² = 3Q₀/(πR²)`.
    pub fn with_flux(radius: f64, q0: f64) -> Result<Self, ModelError> {
        if q0.is_nan() || radius.is_nan() || q0 <= 0.0 || radius <= 0.0 {
            return Err(ModelError::Domain(format!(
                "tent flux and radius must be positive, got q0={q0}, R={radius}"
            )));
        }
        let b = (3.0 * q0 / (PI * radius * radius)).sqrt();
        TentProfile::new(radius / 2.0, b)
    }

    pub fn half_width(&self) -> f64 {
        self.a_half
    }

    pub fn peak(&self) -> f64 {
        self.b
    }

    pub fn eval(&self, r: f64) -> f64 {
        let a = self.a_half;
        if r <= 0.0 || r >= 2.0 * a {
            0.0
        } else if r <= a {
            self.b / a * r
        } else {
            self.b / a * (2.0 * a - r)
        }
    }

    pub fn eval_deriv(&self, r: f64) -> f64 {
        let a = self.a_half;
        if r < 0.0 || r > 2.0 * a {
            0.0
        } else if r <= a {
            self.b / a
        } else {
            -self.b / a
        }
    }

    /// Energy flux `2π ∫ r u₀² dr = (4π/3) a² b²`.
    pub fn flux(&self) -> f64 {
        2.0 * PI * (2.0 / 3.0) * self.a_half * self.a_half * self.b * self.b
    }

    /// Action `I(u₀)` assembled from the closed-form integrals.
    pub fn action(&self, p: &Params) -> f64 {
        let ints = closed_integrals(self.a_half, self.b, p.alpha);
        let n2 = p.winding_sq();
        0.5 * (ints.kinetic + n2 * ints.centrifugal_unit - 2.0 / p.alpha * ints.flux_integral
            + 2.0 / (p.alpha * p.alpha) * ints.log_integral)
    }

    /// The four integrals by quadrature over `mesh` — the independent
    /// route against which the closed forms are checked.
    pub fn integrals_by_quadrature(&self, p: &Params, mesh: &Mesh) -> TentIntegrals {
        let alpha = p.alpha;
        TentIntegrals {
            flux_integral: mesh.integrate(|r| r * self.eval(r) * self.eval(r)),
            kinetic: mesh.integrate(|r| {
                let d = self.eval_deriv(r);
                r * d * d
            }),
            centrifugal_unit: mesh.integrate(|r| self.eval(r) * self.eval(r) / r),
            log_integral: mesh.integrate(|r| r * (alpha * self.eval(r) * self.eval(r)).ln_1p()),
        }
    }
}

fn closed_integrals(a: f64, b: f64, alpha: f64) -> TentIntegrals {
    let two_ln2_m1 = 2.0 * std::f64::consts::LN_2 - 1.0;
    let log_integral = if b == 0.0 {
        0.0
    } else {
        let sab = alpha.sqrt() * b.abs();
        2.0 * a * a * ((alpha * b * b).ln_1p() - 2.0 + 2.0 / sab * sab.atan())
    };
    TentIntegrals {
        flux_integral: 2.0 / 3.0 * a * a * b * b,
        kinetic: 2.0 * b * b,
        centrifugal_unit: 2.0 * b * b * two_ln2_m1,
        log_integral,
    }
}

/// Closed-form tent integrals. The tent must span the whole domain:
/// `a_half = R/2`.
pub fn tent_integrals(tent: &TentProfile, p: &Params) -> Result<TentIntegrals, ModelError> {
    let expected = p.radius() / 2.0;
    if (tent.a_half - expected).abs() > 1e-12 * expected {
        return Err(ModelError::Domain(format!(
            "tent half-width {} must equal R/2 = {}",
            tent.a_half, expected
        )));
    }
    Ok(closed_integrals(tent.a_half, tent.b, p.alpha()))
}
