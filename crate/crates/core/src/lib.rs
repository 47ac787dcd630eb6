//! Numerical laboratory for the space-propagation (Goursat) boundary-value
//! problem of the dimensionless Zakharov system
//!
//! ```text
//!     i E_z + Δ_x E = n E,            E(0, t, x) = E_0(t, x),
//!     (∂_t² − Δ_x) n = Δ_x |E|²,      n(z, 0, x) = n_t(z, 0, x) = 0,
//! ```
//!
//! posed on a slab `z ∈ [0, Z]`, `t ∈ [0, T]`, with `x` on a periodic torus.
//! The propagation variable is the spatial coordinate `z`; time `t` plays the
//! role of a transverse coordinate, so the data surface `{z = 0}` is
//! characteristic for the wave part — the hallmark of the Goursat setup.
//!
//! The crate has two independent computational routes to the same objects,
//! which is the backbone of its validation story:
//!
//! * a **frequency-domain route** ([`kernels`], [`linear`]): fundamental
//!   solutions of the linearization about a plane-wave background are
//!   evaluated by adaptive contour quadrature of explicit symbol formulas,
//!   and the linearized Goursat problem is solved by discrete space–time
//!   convolution against those kernels;
//! * a **direct route** ([`linear`] again, [`nonlinear`]): the same problems
//!   are integrated as Volterra / evolution equations on a grid, with no
//!   contour integrals anywhere.
//!
//! Agreement between the two routes, at tolerances recorded in the test
//! suite, is the primary correctness evidence. On top of the linear theory
//! sit a pseudo-spectral solver for the full nonlinear coupling
//! ([`nonlinear`]), majorant-series machinery that turns the quadratic
//! estimates into an existence/stability threshold ([`analytic`]), and a
//! unit-checked translation layer between laboratory plasma parameters and
//! the dimensionless model ([`physics`]).

pub mod analytic;
pub mod experiments;
pub mod kernels;
pub mod linear;
pub mod mat2;
pub mod nonlinear;
pub mod physics;
pub mod quad;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A numerical routine failed to reach its tolerance within its budget.
    #[error("{what} failed to converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },
    /// Input parameters outside the routine's domain of validity.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An evaluation point fell inside the guard region around a pole.
    #[error("evaluation point too close to a pole: {0}")]
    NearPole(String),
    /// Physical-unit bookkeeping detected an inconsistent combination.
    #[error("unit mismatch: expected {expected}, got {got} in {context}")]
    UnitMismatch {
        expected: String,
        got: String,
        context: String,
    },
    /// Malformed configuration or data file.
    #[error("config error: {0}")]
    Config(String),
    /// Underlying I/O failure (data files, CSV output).
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Convenience alias used throughout: double-precision complex scalar.
pub type C64 = num_complex::Complex64;

/// The imaginary unit as a [`C64`].
pub const I: C64 = C64::new(0.0, 1.0);

/// Real number promoted to [`C64`].
#[inline]
pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}
