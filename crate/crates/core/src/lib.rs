//! Operator Stieltjes integrals with respect to the spectral measure of a
//! normal matrix, and their use in solving Sylvester `XA − CX = D` and
//! Riccati `XA − CX + XBX = D` equations.
//!
//! The crate works at finite dimension: the spectral measure of a normal `C`
//! is a finite sum of eigenprojections, so every integral over it is a
//! finite sum and can be checked against its Riemann–Stieltjes approximations.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod enorm;
pub mod error;
pub mod io;
pub mod linalg;
pub mod random;
pub mod riccati;
pub mod spectral;
pub mod stieltjes;
pub mod sylvester;
pub mod tolerances;

pub use error::{Error, ErrorKind, Result};
pub use linalg::{c64, ComplexMatrix};
pub use num_complex::Complex64;
pub use spectral::{decompose_normal, Rect, SpectralMeasure};
pub use stieltjes::{GridPartition, OperatorFunction, TagRule};
pub use tolerances::Tolerances;
