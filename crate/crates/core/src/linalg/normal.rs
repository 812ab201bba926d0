//! Unitary diagonalization of normal matrices.
//!
//! A normal `C` restricted to an invariant subspace is again normal, and for
//! every angle `θ` the Hermitian part of `e^{−iθ}C` has the same
//! eigenvectors with eigenvalues `Re(e^{−iθ}ζ)`. Splitting at wide gaps of
//! those real eigenvalues and recursing on the blocks never mixes distinct
//! eigenvalues, unlike Schur iterations that stall on repeated ones.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{operator_norm, shifted, ComplexMatrix};
use crate::error::{Error, Result};

/// Four directions `π/4` apart: any two points at distance `δ` differ by at
/// least `δ·cos(π/8)` in one of the projections.
const ANGLES: [f64; 4] = [0.1, 0.1 + FRAC_PI_4, 0.1 + 2.0 * FRAC_PI_4, 0.1 + 3.0 * FRAC_PI_4];

/// Returns `(V, ζ)` with `V` unitary and `C·V ≈ V·diag(ζ)`.
pub fn eig_normal(c: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    let n = c.nrows();
    let floor = 1e-13 * operator_norm(c);
    let mut columns = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    split(c, ComplexMatrix::identity(n, n), floor, &mut columns, &mut values)?;
    if n == 0 {
        return Ok((c.clone(), values));
    }
    Ok((ComplexMatrix::from_columns(&columns), values))
}

fn split(
    c: &ComplexMatrix,
    basis: ComplexMatrix,
    floor: f64,
    columns: &mut Vec<DVector<Complex64>>,
    values: &mut Vec<Complex64>,
) -> Result<()> {
    let m = basis.ncols();
    if m == 0 {
        return Ok(());
    }
    let restricted = basis.adjoint() * c * &basis;
    let tau = restricted.trace() / m as f64;
    let centered = shifted(&restricted, tau);
    let spread = operator_norm(&centered);
    if m == 1 || spread <= floor {
        for j in 0..m {
            columns.push(basis.column(j).into_owned());
            values.push(tau);
        }
        return Ok(());
    }

    // Scaled to unit spread, some eigenvalue pair is at least 1 apart, so one
    // of the projections has a gap of at least cos(π/8)/(m − 1).
    let scaled = centered * Complex64::new(1.0 / spread, 0.0);
    let min_gap = 0.1 / m as f64;
    let mut best: Option<(f64, Vec<usize>, Vec<f64>, ComplexMatrix)> = None;
    for theta in ANGLES {
        let rotated = &scaled * Complex64::from_polar(1.0, -theta);
        let hermitian = (&rotated + rotated.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = hermitian.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let widest = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| widest > b.0) {
            best = Some((widest, order, sorted, eig.eigenvectors));
        }
    }
    let (widest, order, sorted, vectors) = best.expect("at least one angle");
    if !(widest >= min_gap) {
        return Err(Error::EigensolverFailed { dim: c.nrows() });
    }

    let mut start = 0;
    for end in 1..=m {
        if end == m || sorted[end] - sorted[end - 1] >= min_gap {
            let block = ComplexMatrix::from_fn(m, end - start, |r, k| vectors[(r, order[start + k])]);
            split(c, &basis * block, floor, columns, values)?;
            start = end;
        }
    }
    Ok(())
}
