//! Numerical toolkit for the energy-critical nonlinear Schrodinger equation
//! `i u_t + Delta u = f(u)` on `R^n`, `n >= 3`.

// `!(x > 0.0)` rejects NaN on purpose; `%` instead of `is_multiple_of` keeps the MSRV.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod dynamics;
pub mod error;
pub mod norms;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use norms::{norm, AdmissiblePair, Exponent, NormKind, NormReport, NormSettings};
pub use num_complex::Complex64;
pub use spectral::{Dyadic, DyadicLadder, Field, Grid, GridMode, GridSpec, Repr, Trajectory};
