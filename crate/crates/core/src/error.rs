use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the numerical routines in this crate.
///
/// Variants are grouped by how a caller should react: invalid input,
/// a violated mathematical precondition, or a method that did not converge.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not normal: commutator norm {defect:.3e} exceeds {threshold:.3e}")]
    NotNormal { defect: f64, threshold: f64 },

    #[error("Schur iteration did not converge on a {dim}x{dim} matrix")]
    EigensolverFailed { dim: usize },

    #[error("resolvent is numerically singular at z = {z}")]
    SingularResolvent { z: Complex64 },

    #[error("eigenvalue {eigenvalue} lies within {tol:.3e} of the rectangle boundary")]
    BoundaryEigenvalue { eigenvalue: Complex64, tol: f64 },

    #[error("refinement did not converge after {levels} levels (last difference {last_diff:.3e})")]
    NoConvergence { levels: usize, last_diff: f64 },

    #[error("spectral gap {gap:.3e} does not exceed {threshold:.3e}")]
    GapViolation { gap: f64, threshold: f64 },

    #[error("Kronecker system is singular: spectra overlap")]
    SingularSystem,

    #[error("no admissible contour separates the spectra")]
    ContourConstructionFailed,

    #[error("contour quadrature did not converge with {nodes} nodes (last change {last_change:.3e})")]
    QuadratureNoConvergence { nodes: usize, last_change: f64 },

    #[error("B = 0: the equation is linear, use the Sylvester solver")]
    ZeroB,

    #[error("contraction certificate failed: sqrt(|B| |D|_E) = {lhs:.6e} is not below d/2 = {half_gap:.6e}")]
    Uncertified { lhs: f64, half_gap: f64 },

    #[error("fixed-point iteration exceeded {iterations} iterations (last step {last_step:.3e})")]
    MaxIterExceeded { iterations: usize, last_step: f64 },
}

/// How a caller should react to an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input.
    InvalidInput,
    /// Well-formed input violating a mathematical precondition.
    Precondition,
    /// An iterative method did not reach its tolerance.
    NonConvergence,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) | Error::ShapeMismatch { .. } | Error::BoundaryEigenvalue { .. } => {
                ErrorKind::InvalidInput
            }
            Error::NotNormal { .. }
            | Error::GapViolation { .. }
            | Error::SingularSystem
            | Error::ContourConstructionFailed
            | Error::ZeroB
            | Error::Uncertified { .. } => ErrorKind::Precondition,
            Error::SingularResolvent { .. }
            | Error::EigensolverFailed { .. }
            | Error::NoConvergence { .. }
            | Error::QuadratureNoConvergence { .. }
            | Error::MaxIterExceeded { .. } => ErrorKind::NonConvergence,
        }
    }

    pub(crate) fn shape(
        context: &'static str,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        Error::ShapeMismatch {
            context,
            expected: expected.into(),
            found: found.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
