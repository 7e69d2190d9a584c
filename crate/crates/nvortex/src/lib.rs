//! Ring-profile vortex soliton solver for the saturable nonlinear
//! Schrödinger equation.
//!
//! An optical beam `E = u(r) exp(i(κz + nθ))` propagating in a saturable
//! self-focusing medium has a radial amplitude governed by the n-vortex
//! equation on `[0, R]`:
//!
//! ```text
//! (r u')' - (n²/r) u + 2 r u³/(1 + α u²) - 2κ r u = 0,    u(0) = u(R) = 0,
//! ```
//!
//! with saturation constant `α > 0`, vortex winding number `|n| ≥ 1`, and
//! wave propagation constant `κ`. The beam's energy flux
//! `Q(u) = 2π ∫ r u² dr` is the natural constraint: prescribing `Q = Q₀`
//! and minimizing the action functional over a radial basis yields the
//! soliton amplitude along with `κ` as a Lagrange multiplier.
//!
//! The crate provides:
//!
//! * [`basis`] — uniform radial meshes with composite Gauss–Legendre
//!   quadrature, spectral-sine and P1-hat basis families orthonormalized
//!   under the flux inner product `(u, v) = 2π ∫ r u v dr`.
//! * [`model`] — the action, energy, flux, and Nehari functionals of the
//!   continuous problem, evaluated against discretized fields, plus the
//!   piecewise-linear tent profile whose integrals have closed forms.
//! * [`optimizer`] — the flux-constrained sphere minimization and the
//!   fixed-κ Nehari-manifold minimization.
//! * [`bounds`] — closed-form existence bounds on κ (necessary condition,
//!   lower bound, winding-number sign rule, exponential-decay check).
//! * [`oracle`] — an independent shooting-method solver for the same ODE
//!   at fixed κ, used to cross-validate variational output.
//! * [`cli`] — run configurations, result records, and CSV/JSON writers
//!   behind the `nvortex` command-line binary.

pub mod basis;
pub mod bounds;
pub mod cli;
mod linalg;
pub mod model;
pub mod optimizer;
pub mod oracle;

pub use basis::{BasisKind, BasisSet, Mesh, RadialField};
pub use model::Params;
pub use optimizer::{SolveResult, SolverSettings};
