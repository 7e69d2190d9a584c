//! Radial discretization: mesh, quadrature, and orthonormal basis sets.
//!
//! Fields are expanded as `u = Σ aⱼ ψⱼ` where the `ψⱼ` vanish at `r = 0`
//! and `r = R` and are orthonormal under the flux inner product
//! `(u, v) = 2π ∫₀ᴿ r u v dr`, so that the energy flux of a field is just
//! `Σ aⱼ²`. Two raw families are provided — global sines `sin(jπr/R)`
//! (smooth, second derivatives available) and piecewise-linear interior
//! hats — and both are orthonormalized through a Cholesky factorization of
//! their weighted Gram matrix, which spans the same flags as classical
//! Gram–Schmidt but with better conditioning.
//!
//! All integrals in the crate run over the mesh's composite Gauss–Legendre
//! rule with 4 nodes per cell: exact for the polynomial pieces (hat basis
//! products are cubics) and spectrally accurate for the smooth nonlinear
//! integrands. Quadrature nodes are interior to their cells, so integrands
//! with a `1/r` factor are never evaluated at the vortex core; admissible
//! fields behave like `O(r)` there, keeping `u²/r` bounded.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg;

/// 4-point Gauss–Legendre rule on [-1, 1].
const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_2,
    0.652_145_154_862_546_2,
    0.347_854_845_137_453_85,
];

/// Default number of uniform cells for spectral bases.
pub const DEFAULT_CELLS: usize = 512;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("dimension mismatch: expected {expected} coefficients, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Uniform partition of `[0, R]` carrying its composite quadrature rule.
#[derive(Debug, Clone)]
pub struct Mesh {
    radius: f64,
    n_cells: usize,
    quad_r: Vec<f64>,
    quad_w: Vec<f64>,
}

impl Mesh {
    pub fn uniform(radius: f64, n_cells: usize) -> Result<Self, BasisError> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(BasisError::Config(format!(
                "mesh radius must be positive and finite, got {radius}"
            )));
        }
        if n_cells == 0 {
            return Err(BasisError::Config("mesh needs at least one cell".into()));
        }
        let h = radius / n_cells as f64;
        let mut quad_r = Vec::with_capacity(4 * n_cells);
        let mut quad_w = Vec::with_capacity(4 * n_cells);
        for c in 0..n_cells {
            let mid = (c as f64 + 0.5) * h;
            for k in 0..4 {
                quad_r.push(mid + 0.5 * h * GL4_X[k]);
                quad_w.push(0.5 * h * GL4_W[k]);
            }
        }
        Ok(Mesh {
            radius,
            n_cells,
            quad_r,
            quad_w,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn cell_width(&self) -> f64 {
        self.radius / self.n_cells as f64
    }

    /// Quadrature nodes, strictly inside `(0, R)`.
    pub fn quad_points(&self) -> &[f64] {
        &self.quad_r
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_w
    }

    /// `∫₀ᴿ f(r) dr` by the mesh's composite rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.quad_r
            .iter()
            .zip(&self.quad_w)
            .map(|(&r, &w)| w * f(r))
            .sum()
    }
}

/// Raw basis families (before orthonormalization).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// `sin(jπr/R)`, `j = 1..N`. Smooth; supports strong residuals.
    SpectralSine,
    /// Interior P1 hat functions on the mesh nodes; `N = n_cells - 1`.
    HatP1,
}

impl BasisKind {
    pub fn label(&self) -> &'static str {
        match self {
            BasisKind::SpectralSine => "sine",
            BasisKind::HatP1 => "hat",
        }
    }
}

/// An orthonormal radial basis with cached node tables.
///
/// `transform` is the upper-triangular change of basis from raw functions
/// to orthonormal ones: `ψⱼ = Σᵢ T[i,j] φᵢ`, with `Tᵀ G_raw T = I`.
#[derive(Debug)]
pub struct BasisSet {
    kind: BasisKind,
    n_funcs: usize,
    mesh: Mesh,
    transform: Vec<f64>,
    /// ψⱼ(r_q), row-major (n_funcs × n_quad)
    values: Vec<f64>,
    derivs: Vec<f64>,
    seconds: Option<Vec<f64>>,
}

/// Orthonormalizing transform from a weighted Gram matrix.
///
/// Returns upper-triangular `T` with `Tᵀ G T = I`, computed as the inverse
/// transpose of the Cholesky factor of `G`. Rejects matrices that are not
/// positive definite to tolerance, which signals linearly dependent raw
/// functions.
pub fn orthonormalize(gram: &[f64], n: usize) -> Result<Vec<f64>, BasisError> {
    if gram.len() != n * n {
        return Err(BasisError::Dimension {
            expected: n * n,
            got: gram.len(),
        });
    }
    let mut l = gram.to_vec();
    linalg::cholesky_in_place(&mut l, n, 1e-13).map_err(BasisError::Numerical)?;
    Ok(linalg::inverse_transpose_of_lower(&l, n))
}

impl BasisSet {
    /// Build and orthonormalize a basis over `mesh`.
    ///
    /// For `HatP1` the basis size is tied to the mesh: `n_funcs` must equal
    /// `mesh.n_cells() - 1` (one hat per interior node).
    pub fn build(kind: BasisKind, n_funcs: usize, mesh: Mesh) -> Result<Arc<Self>, BasisError> {
        if n_funcs < 2 {
            return Err(BasisError::Config(format!(
                "basis needs at least 2 functions, got {n_funcs}"
            )));
        }
        if kind == BasisKind::HatP1 && n_funcs != mesh.n_cells() - 1 {
            return Err(BasisError::Config(format!(
                "hat basis requires n_funcs = n_cells - 1 (got {} functions on {} cells)",
                n_funcs,
                mesh.n_cells()
            )));
        }
        let nq = mesh.quad_r.len();
        let mut raw_vals = vec![0.0; n_funcs * nq];
        let mut raw_derivs = vec![0.0; n_funcs * nq];
        let mut raw_seconds = match kind {
            BasisKind::SpectralSine => Some(vec![0.0; n_funcs * nq]),
            BasisKind::HatP1 => None,
        };
        for j in 0..n_funcs {
            for (q, &r) in mesh.quad_r.iter().enumerate() {
                let (v, d, s) = raw_eval(kind, &mesh, j, r);
                raw_vals[j * nq + q] = v;
                raw_derivs[j * nq + q] = d;
                if let Some(sec) = raw_seconds.as_mut() {
                    sec[j * nq + q] = s;
                }
            }
        }

        // Weighted Gram G_ij = 2π ∫ r φ_i φ_j dr over the same quadrature
        // that evaluates every other functional, so discrete orthonormality
        // holds to rounding.
        let mut gram = vec![0.0; n_funcs * n_funcs];
        let wr: Vec<f64> = mesh
            .quad_w
            .iter()
            .zip(&mesh.quad_r)
            .map(|(&w, &r)| 2.0 * std::f64::consts::PI * w * r)
            .collect();
        for i in 0..n_funcs {
            for j in i..n_funcs {
                let mut s = 0.0;
                for q in 0..nq {
                    s += wr[q] * raw_vals[i * nq + q] * raw_vals[j * nq + q];
                }
                gram[i * n_funcs + j] = s;
                gram[j * n_funcs + i] = s;
            }
        }
        let transform = orthonormalize(&gram, n_funcs)?;

        let apply = |raw: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n_funcs * nq];
            for j in 0..n_funcs {
                // ψ_j = Σ_{i ≤ j} T[i,j] φ_i
                for i in 0..=j {
                    let t = transform[i * n_funcs + j];
                    if t == 0.0 {
                        continue;
                    }
                    let src = &raw[i * nq..(i + 1) * nq];
                    let dst = &mut out[j * nq..(j + 1) * nq];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += t * s;
                    }
                }
            }
            out
        };
        let values = apply(&raw_vals);
        let derivs = apply(&raw_derivs);
        let seconds = raw_seconds.as_deref().map(apply);

        Ok(Arc::new(BasisSet {
            kind,
            n_funcs,
            mesh,
            transform,
            values,
            derivs,
            seconds,
        }))
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.n_funcs
    }

    pub fn is_empty(&self) -> bool {
        self.n_funcs == 0
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Whether cached second derivatives exist (spectral bases only).
    pub fn has_second_derivatives(&self) -> bool {
        self.seconds.is_some()
    }

    pub(crate) fn values_table(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn derivs_table(&self) -> &[f64] {
        &self.derivs
    }

    /// Recompute the orthonormal Gram matrix by quadrature (diagnostic).
    pub fn gram_matrix(&self) -> Vec<f64> {
        let n = self.n_funcs;
        let nq = self.mesh.quad_r.len();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for q in 0..nq {
                    s += 2.0
                        * std::f64::consts::PI
                        * self.mesh.quad_w[q]
                        * self.mesh.quad_r[q]
                        * self.values[i * nq + q]
                        * self.values[j * nq + q];
                }
                g[i * n + j] = s;
                g[j * n + i] = s;
            }
        }
        g
    }

    /// Expand coefficients into a field with cached node samples.
    pub fn synthesize(self: &Arc<Self>, coeffs: &[f64]) -> Result<RadialField, BasisError> {
        if coeffs.len() != self.n_funcs {
            return Err(BasisError::Dimension {
                expected: self.n_funcs,
                got: coeffs.len(),
            });
        }
        let nq = self.mesh.quad_r.len();
        let values = linalg::coeffs_times_table(&self.values, self.n_funcs, nq, coeffs);
        let derivs = linalg::coeffs_times_table(&self.derivs, self.n_funcs, nq, coeffs);
        let seconds = self
            .seconds
            .as_ref()
            .map(|s| linalg::coeffs_times_table(s, self.n_funcs, nq, coeffs));
        // raw-basis coefficients b = T a, used for pointwise evaluation
        let mut raw_coeffs = vec![0.0; self.n_funcs];
        for (i, slot) in raw_coeffs.iter_mut().enumerate() {
            let row = &self.transform[i * self.n_funcs..(i + 1) * self.n_funcs];
            *slot = row[i..].iter().zip(&coeffs[i..]).map(|(t, a)| t * a).sum();
        }
        Ok(RadialField {
            basis: Arc::clone(self),
            coeffs: coeffs.to_vec(),
            raw_coeffs,
            values,
            derivs,
            seconds,
        })
    }

    /// Coefficients of the flux-orthogonal projection of node samples:
    /// `aⱼ = 2π ∫ r f ψⱼ dr`.
    pub fn project(&self, samples: &[f64]) -> Result<Vec<f64>, BasisError> {
        let nq = self.mesh.quad_r.len();
        if samples.len() != nq {
            return Err(BasisError::Dimension {
                expected: nq,
                got: samples.len(),
            });
        }
        let weighted: Vec<f64> = (0..nq)
            .map(|q| {
                2.0 * std::f64::consts::PI * self.mesh.quad_w[q] * self.mesh.quad_r[q] * samples[q]
            })
            .collect();
        Ok(linalg::table_times_nodes(
            &self.values,
            self.n_funcs,
            nq,
            &weighted,
        ))
    }

    /// Project an arbitrary function (sampled at the quadrature nodes) and
    /// synthesize the result.
    pub fn project_fn(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> Result<RadialField, BasisError> {
        let samples: Vec<f64> = self.mesh.quad_r.iter().map(|&r| f(r)).collect();
        let coeffs = self.project(&samples)?;
        self.synthesize(&coeffs)
    }
}

fn raw_eval(kind: BasisKind, mesh: &Mesh, j: usize, r: f64) -> (f64, f64, f64) {
    match kind {
        BasisKind::SpectralSine => {
            let k = (j as f64 + 1.0) * std::f64::consts::PI / mesh.radius;
            ((k * r).sin(), k * (k * r).cos(), -k * k * (k * r).sin())
        }
        BasisKind::HatP1 => {
            let h = mesh.cell_width();
            let center = (j as f64 + 1.0) * h;
            let d = r - center;
            if d.abs() >= h {
                (0.0, 0.0, 0.0)
            } else if d < 0.0 {
                (1.0 + d / h, 1.0 / h, 0.0)
            } else {
                (1.0 - d / h, -1.0 / h, 0.0)
            }
        }
    }
}

/// A discretized amplitude `u(r) = Σ aⱼ ψⱼ(r)` with cached samples of `u`
/// and `u'` (and `u''` when the basis is smooth) at the quadrature nodes.
///
/// Every admissible basis function vanishes at both endpoints, so
/// `u(0) = u(R) = 0` holds for every field by construction.
#[derive(Debug, Clone)]
pub struct RadialField {
    basis: Arc<BasisSet>,
    coeffs: Vec<f64>,
    raw_coeffs: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    seconds: Option<Vec<f64>>,
}

impl RadialField {
    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn mesh(&self) -> &Mesh {
        self.basis.mesh()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `u(r_q)` at the quadrature nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `u'(r_q)` at the quadrature nodes.
    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// `u''(r_q)` when the basis is twice differentiable.
    pub fn second_derivs(&self) -> Option<&[f64]> {
        self.seconds.as_deref()
    }

    /// Pointwise evaluation at arbitrary `r ∈ [0, R]`.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 || r >= self.basis.mesh.radius {
            return 0.0; // boundary conditions are exact
        }
        let mut s = 0.0;
        for (i, &b) in self.raw_coeffs.iter().enumerate() {
            if b != 0.0 {
                s += b * raw_eval(self.basis.kind, &self.basis.mesh, i, r).0;
            }
        }
        s
    }

    /// Pointwise derivative at arbitrary `r`.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.basis.mesh.radius);
        let mut s = 0.0;
        for (i, &b) in self.raw_coeffs.iter().enumerate() {
            if b != 0.0 {
                s += b * raw_eval(self.basis.kind, &self.basis.mesh, i, r).1;
            }
        }
        s
    }

    /// Field scaled by a constant: `t·u` (samples rescaled, no matvec).
    pub fn scaled(&self, t: f64) -> RadialField {
        let scale = |v: &[f64]| v.iter().map(|x| t * x).collect::<Vec<f64>>();
        RadialField {
            basis: Arc::clone(&self.basis),
            coeffs: scale(&self.coeffs),
            raw_coeffs: scale(&self.raw_coeffs),
            values: scale(&self.values),
            derivs: scale(&self.derivs),
            seconds: self.seconds.as_deref().map(scale),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sine_basis(n: usize, cells: usize) -> Arc<BasisSet> {
        let mesh = Mesh::uniform(8.0, cells).unwrap();
        BasisSet::build(BasisKind::SpectralSine, n, mesh).unwrap()
    }

    fn max_gram_error(basis: &BasisSet) -> f64 {
        let n = basis.len();
        let g = basis.gram_matrix();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[i * n + j] - want).abs());
            }
        }
        worst
    }

    #[test]
    fn quadrature_weights_sum_to_radius() {
        let mesh = Mesh::uniform(8.0, 512).unwrap();
        let total: f64 = mesh.quad_weights().iter().sum();
        assert!((total - 8.0).abs() < 1e-12, "Σw = {total}");
        assert!(mesh.quad_points().iter().all(|&r| r > 0.0 && r < 8.0));
    }

    #[test]
    fn quadrature_is_exact_for_cubics() {
        let mesh = Mesh::uniform(2.0, 3).unwrap();
        let got = mesh.integrate(|r| r * r * r);
        assert!((got - 4.0).abs() < 1e-13, "∫r³ over [0,2] = {got}");
    }

    #[test]
    fn spectral_raw_functions_vanish_at_boundaries() {
        let basis = sine_basis(2, 64);
        let u = basis.synthesize(&[0.7, -0.3]).unwrap();
        assert_eq!(u.eval(0.0), 0.0);
        assert_eq!(u.eval(8.0), 0.0);
    }

    #[test]
    fn hat_basis_is_nodal() {
        let mesh = Mesh::uniform(8.0, 4).unwrap();
        let h = mesh.cell_width();
        // raw hat #2 (index 1) peaks at node r_2 = 2h and vanishes at r_1, r_3
        let (v, _, _) = raw_eval(BasisKind::HatP1, &mesh, 1, 2.0 * h);
        assert_eq!(v, 1.0);
        let (v1, _, _) = raw_eval(BasisKind::HatP1, &mesh, 1, h);
        let (v3, _, _) = raw_eval(BasisKind::HatP1, &mesh, 1, 3.0 * h);
        assert_eq!(v1, 0.0);
        assert_eq!(v3, 0.0);
        let basis = BasisSet::build(BasisKind::HatP1, 3, mesh).unwrap();
        assert_eq!(basis.len(), 3);
    }

    #[test]
    fn build_rejects_bad_configs() {
        let mesh = Mesh::uniform(8.0, 16).unwrap();
        assert!(matches!(
            BasisSet::build(BasisKind::SpectralSine, 1, mesh.clone()),
            Err(BasisError::Config(_))
        ));
        assert!(matches!(
            BasisSet::build(BasisKind::HatP1, 8, mesh),
            Err(BasisError::Config(_))
        ));
    }

    #[test]
    fn orthonormalize_identity_is_identity() {
        let g = [1.0, 0.0, 0.0, 1.0];
        let t = orthonormalize(&g, 2).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-14 && (t[3] - 1.0).abs() < 1e-14);
        assert!(t[1].abs() < 1e-14 && t[2].abs() < 1e-14);
    }

    #[test]
    fn orthonormalize_diagonal_gram() {
        let g = [2.0, 0.0, 0.0, 8.0];
        let t = orthonormalize(&g, 2).unwrap();
        assert!((t[0] - 1.0 / 2.0_f64.sqrt()).abs() < 1e-14);
        assert!((t[3] - 1.0 / 8.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn orthonormalize_rejects_dependent_functions() {
        // Gram of two identical functions is singular.
        let g = [1.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            orthonormalize(&g, 2),
            Err(BasisError::Numerical(_))
        ));
    }

    #[test]
    fn gram_identity_spectral_n10() {
        let basis = sine_basis(10, 512);
        assert!(max_gram_error(&basis) <= 1e-10);
    }

    #[test]
    fn gram_identity_both_kinds_up_to_64() {
        let spectral = sine_basis(64, 512);
        assert!(
            max_gram_error(&spectral) <= 1e-10,
            "spectral N=64: {}",
            max_gram_error(&spectral)
        );
        let mesh = Mesh::uniform(8.0, 65).unwrap();
        let hats = BasisSet::build(BasisKind::HatP1, 64, mesh).unwrap();
        assert!(
            max_gram_error(&hats) <= 1e-10,
            "hat N=64: {}",
            max_gram_error(&hats)
        );
    }

    #[test]
    fn synthesize_zero_and_unit_vectors() {
        let basis = sine_basis(8, 128);
        let zero = basis.synthesize(&[0.0; 8]).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let mut e1 = vec![0.0; 8];
        e1[0] = 1.0;
        let u = basis.synthesize(&e1).unwrap();
        let flux = crate::model::energy_flux(&u);
        assert!((flux - 1.0).abs() < 1e-12, "flux of ψ₁ = {flux}");
    }

    #[test]
    fn synthesize_rejects_wrong_length() {
        let basis = sine_basis(8, 128);
        assert!(matches!(
            basis.synthesize(&[1.0, 2.0]),
            Err(BasisError::Dimension { .. })
        ));
    }

    #[test]
    fn project_recovers_basis_function() {
        let basis = sine_basis(6, 256);
        let nq = basis.mesh().quad_points().len();
        let mut e3 = vec![0.0; 6];
        e3[2] = 1.0;
        let f = basis.synthesize(&e3).unwrap();
        let a = basis.project(&f.values()[..nq]).unwrap();
        for (j, &aj) in a.iter().enumerate() {
            let want = if j == 2 { 1.0 } else { 0.0 };
            assert!((aj - want).abs() < 1e-11, "a[{j}] = {aj}");
        }
    }

    #[test]
    fn tent_projection_flux_close() {
        // flux of the tent (a=4, b=1) is 2π·(2/3)a²b²; a 40-mode projection
        // must capture it to 0.1%
        let basis = sine_basis(40, 512);
        let tent = |r: f64| {
            if r <= 4.0 {
                r / 4.0
            } else {
                (8.0 - r) / 4.0
            }
        };
        let u = basis.project_fn(tent).unwrap();
        let flux = crate::model::energy_flux(&u);
        let exact = 2.0 * std::f64::consts::PI * (2.0 / 3.0) * 16.0;
        assert!(
            ((flux - exact) / exact).abs() < 1e-3,
            "flux {flux} vs {exact}"
        );
    }

    #[test]
    fn spectral_projection_error_decreases_with_refinement() {
        // smooth target vanishing at both ends
        let target = |r: f64| r * r * (8.0 - r) * (8.0 - r) / 64.0;
        let mesh = Mesh::uniform(8.0, 512).unwrap();
        let exact_flux = 2.0 * std::f64::consts::PI * mesh.integrate(|r| r * target(r) * target(r));
        let mut prev = f64::INFINITY;
        for n in [4, 8, 16, 32] {
            let basis = BasisSet::build(BasisKind::SpectralSine, n, mesh.clone()).unwrap();
            let u = basis.project_fn(target).unwrap();
            let captured: f64 = u.coeffs().iter().map(|a| a * a).sum();
            let err = (exact_flux - captured).max(0.0);
            assert!(
                err < prev,
                "N={n}: error {err} did not decrease from {prev}"
            );
            prev = err;
        }
    }

    #[test]
    fn eval_matches_cached_samples() {
        let basis = sine_basis(12, 128);
        let coeffs: Vec<f64> = (0..12).map(|j| 1.0 / (1.0 + j as f64)).collect();
        let u = basis.synthesize(&coeffs).unwrap();
        for q in [0, 57, 300, 511] {
            let r = basis.mesh().quad_points()[q];
            assert!((u.eval(r) - u.values()[q]).abs() < 1e-11);
            assert!((u.eval_deriv(r) - u.derivs()[q]).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        // Parseval: energy flux equals Σa² for orthonormal coefficients.
        #[test]
        fn parseval_flux_identity(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let basis = sine_basis(20, 256);
            let coeffs: Vec<f64> = (0..20).map(|_| rng.random_range(-2.0..2.0)).collect();
            let u = basis.synthesize(&coeffs).unwrap();
            let flux = crate::model::energy_flux(&u);
            let sum: f64 = coeffs.iter().map(|a| a * a).sum();
            prop_assert!((flux - sum).abs() <= 1e-10 * sum.max(1e-30),
                "flux {} vs Σa² {}", flux, sum);
        }

        // project ∘ synthesize is the identity on coefficients.
        #[test]
        fn project_synthesize_roundtrip(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let basis = sine_basis(10, 256);
            let coeffs: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u = basis.synthesize(&coeffs).unwrap();
            let back = basis.project(u.values()).unwrap();
            for (a, b) in coeffs.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            }
        }
    }
}
