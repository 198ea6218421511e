//! Numerics for the Schäffer constant problem.
//!
//! The crate computes Taylor coefficients of Blaschke powers, the explicit
//! lower-triangular Toeplitz counterexample and its model-space realisation,
//! truncated Wiener-algebra quotient norms via linear programming, a family
//! of resolvent upper bounds, and saddle-point asymptotics of the weighted
//! coefficients. The `harness` module drives these as reproducible studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy;
pub mod asymptotics;
pub mod blaschke;
mod error;
mod fourier;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod resolvent;
pub mod simplex;
pub mod validation;
pub mod wiener;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;
