//! Norm of an operator with respect to a spectral measure.
//!
//! `‖Y‖_E² = sup Σᵢ ‖Y*·E(Ωᵢ)·Y‖` over finite families of disjoint Borel sets.
//! Splitting a set never decreases the sum: `E` is additive and the operator
//! norm subadditive. With finitely many atoms the finest useful family is
//! one set per atom, so the supremum equals `Σₖ ‖Y*·Pₖ·Y‖`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::spectral::{Rect, SpectralMeasure};
use crate::stieltjes::OperatorFunction;

fn check_rows(y: &ComplexMatrix, sm: &SpectralMeasure, context: &'static str) -> Result<()> {
    if y.nrows() != sm.dim() {
        return Err(Error::shape(context, format!("{} rows", sm.dim()), format!("{} rows", y.nrows())));
    }
    Ok(())
}

/// `‖Y‖_E` for `Y` mapping into the space the measure acts on.
pub fn e_norm(y: &ComplexMatrix, sm: &SpectralMeasure) -> Result<f64> {
    check_rows(y, sm, "E-norm")?;
    let yh = y.adjoint();
    let total: f64 = sm
        .atoms()
        .iter()
        .map(|atom| linalg::operator_norm(&(&yh * &atom.projection * y)))
        .sum();
    Ok(total.sqrt())
}

/// `‖Z‖_E = ‖Z*‖_E` for `Z` mapping out of the measure's space.
pub fn e_norm_adjoint(z: &ComplexMatrix, sm: &SpectralMeasure) -> Result<f64> {
    e_norm(&z.adjoint(), sm)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnormSandwich {
    pub op_norm: f64,
    pub e_norm: f64,
    pub hs_norm: f64,
    /// `‖Y‖ ≤ ‖Y‖_E ≤ ‖Y‖₂` up to a relative slack of `1e-12`.
    pub holds: bool,
}

pub const SANDWICH_SLACK: f64 = 1e-12;

pub fn check_enorm_sandwich(y: &ComplexMatrix, sm: &SpectralMeasure) -> Result<EnormSandwich> {
    let e = e_norm(y, sm)?;
    let op = linalg::operator_norm(y);
    let hs = linalg::hs_norm(y);
    let holds = op <= e * (1.0 + SANDWICH_SLACK) + f64::MIN_POSITIVE
        && e <= hs * (1.0 + SANDWICH_SLACK) + f64::MIN_POSITIVE;
    Ok(EnormSandwich {
        op_norm: op,
        e_norm: e,
        hs_norm: hs,
        holds,
    })
}

/// Both sides of the bounds `‖∫ dE·Y·F‖ ≤ ‖Y‖_E·sup‖F‖` and
/// `‖∫ F·Y*·dE‖ ≤ ‖Y‖_E·sup‖F‖` over the atoms in `r`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegralBound {
    /// `‖Σₖ Pₖ·Y·F(ζₖ)‖`.
    pub left: f64,
    /// `‖Σₖ F(ζₖ)·Y*·Pₖ‖`.
    pub right: f64,
    /// `‖Y‖_E · maxₖ ‖F(ζₖ)‖`.
    pub bound: f64,
}

impl IntegralBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.left <= self.bound + tol && self.right <= self.bound + tol
    }
}

pub fn bounded_integral_bound_check(
    y: &ComplexMatrix,
    f: &OperatorFunction<'_>,
    sm: &SpectralMeasure,
    r: &Rect,
) -> Result<IntegralBound> {
    check_rows(y, sm, "integral bound")?;
    let (rows, cols) = f.shape();
    if rows != y.ncols() || cols != y.ncols() {
        return Err(Error::shape(
            "integral bound",
            format!("{0}x{0} function values", y.ncols()),
            format!("{rows}x{cols}"),
        ));
    }
    let yh = y.adjoint();
    let mut left = ComplexMatrix::zeros(sm.dim(), cols);
    let mut right = ComplexMatrix::zeros(rows, sm.dim());
    let mut sup: f64 = 0.0;
    for k in sm.atoms_in(r) {
        let atom = &sm.atoms()[k];
        let value = f.eval_at(atom.eigenvalue)?;
        sup = sup.max(linalg::operator_norm(&value));
        left += &atom.projection * y * &value;
        right += &value * &yh * &atom.projection;
    }
    Ok(IntegralBound {
        left: linalg::operator_norm(&left),
        right: linalg::operator_norm(&right),
        bound: e_norm(y, sm)? * sup,
    })
}
