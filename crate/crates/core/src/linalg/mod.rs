//! Dense complex-matrix primitives shared by the rest of the crate.

mod normal;
mod numrange;

pub use normal::eig_normal;
pub use numrange::{dist_to_numrange, numrange_support, NumericalRange};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Dense complex matrix, row and column counts at least one.
pub type ComplexMatrix = DMatrix<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rejects empty matrices and matrices with non-finite entries.
pub fn validate(m: &ComplexMatrix, name: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::InvalidInput(format!("matrix {name} is empty")));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "matrix {name} has non-finite entries"
        )));
    }
    Ok(())
}

pub fn require_square(m: &ComplexMatrix, context: &'static str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::shape(
            context,
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ))
    }
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Frobenius (Hilbert–Schmidt) norm.
pub fn hs_norm(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `M − zI` for square `M`.
pub fn shifted(m: &ComplexMatrix, z: Complex64) -> ComplexMatrix {
    let mut s = m.clone();
    for i in 0..s.nrows() {
        s[(i, i)] -= z;
    }
    s
}

/// Operator norm of the commutator `M*M − MM*`.
pub fn normality_defect(m: &ComplexMatrix) -> f64 {
    let mh = m.adjoint();
    operator_norm(&(&mh * m - m * &mh))
}

/// Whether `M` passes the relative normality test `‖M*M − MM*‖ ≤ tol·‖M‖²`.
pub fn is_normal(m: &ComplexMatrix, tol_normal: f64) -> bool {
    m.is_square() && normality_defect(m) <= tol_normal * operator_norm(m).powi(2)
}

/// Complex Schur form `M = Q·T·Q*`.
///
/// The QR iteration first runs on `(M − τI)/s` with `τ = tr M / n` and `s`
/// the Frobenius norm of `M − τI`: on a near-scalar matrix such as `λI` plus
/// rounding noise the iteration on `M` itself never deflates.
pub fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((m.clone(), m.clone()));
    }
    let tau = m.trace() / n as f64;
    let centered = shifted(m, tau);
    let s = centered.norm();
    if s == 0.0 {
        return Ok((identity(n), m.clone()));
    }
    let max_iter = 100 * n + 1000;
    if let Some(f) = Schur::try_new(centered * Complex64::new(1.0 / s, 0.0), f64::EPSILON, max_iter) {
        let (q, t) = f.unpack();
        return Ok((q, t * Complex64::new(s, 0.0) + identity(n) * tau));
    }
    Schur::try_new(m.clone(), f64::EPSILON, max_iter)
        .map(|f| f.unpack())
        .ok_or(Error::EigensolverFailed { dim: n })
}

/// Eigenvalues of a square matrix; normal matrices are diagonalized directly,
/// others go through the complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if is_normal(m, 1e-12) {
        return Ok(eig_normal(m)?.1);
    }
    let t = schur(m)?.1;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Solves `(M − zI)·Y = rhs` by LU with partial pivoting.
///
/// A shift is declared singular when the LU factorization breaks down,
/// when its smallest pivot falls below `rel_tol·max(1, ‖M − zI‖_F)`,
/// or when the solution is not finite.
pub fn solve_shifted(
    m: &ComplexMatrix,
    z: Complex64,
    rhs: &ComplexMatrix,
    rel_tol: f64,
) -> Result<ComplexMatrix> {
    require_square(m, "shifted solve")?;
    if rhs.nrows() != m.nrows() {
        return Err(Error::shape(
            "shifted solve",
            format!("{} rows", m.nrows()),
            format!("{} rows", rhs.nrows()),
        ));
    }
    let s = shifted(m, z);
    let scale = s.norm().max(1.0);
    let lu = s.lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows())
        .map(|i| u[(i, i)].norm())
        .fold(f64::INFINITY, f64::min);
    if !(min_pivot > rel_tol * scale) {
        return Err(Error::SingularResolvent { z });
    }
    let y = lu.solve(rhs).ok_or(Error::SingularResolvent { z })?;
    if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularResolvent { z });
    }
    Ok(y)
}

/// `lhs·(M − zI)⁻¹`, computed as the transpose of a solve with `(M − zI)ᵀ`.
pub fn right_divide_shifted(
    lhs: &ComplexMatrix,
    m: &ComplexMatrix,
    z: Complex64,
    rel_tol: f64,
) -> Result<ComplexMatrix> {
    if lhs.ncols() != m.nrows() {
        return Err(Error::shape(
            "right division",
            format!("{} columns", m.nrows()),
            format!("{} columns", lhs.ncols()),
        ));
    }
    let yt = solve_shifted(&m.transpose(), z, &lhs.transpose(), rel_tol)?;
    Ok(yt.transpose())
}

/// `(M − zI)⁻¹`, computed column by column from one LU factorization.
///
/// Besides the pivot test of [`solve_shifted`], the shift is rejected when
/// `‖R‖_F·rel_tol·max(1, ‖M‖_F) ≥ 1`, i.e. when `z` sits within roughly
/// `rel_tol` (relative) of the spectrum.
pub fn resolvent_with(m: &ComplexMatrix, z: Complex64, rel_tol: f64) -> Result<ComplexMatrix> {
    require_square(m, "resolvent")?;
    let r = solve_shifted(m, z, &identity(m.nrows()), rel_tol)?;
    if r.norm() * rel_tol * m.norm().max(1.0) >= 1.0 {
        return Err(Error::SingularResolvent { z });
    }
    Ok(r)
}

/// `(M − zI)⁻¹` with the default clustering tolerance as singularity threshold.
pub fn resolvent(m: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    resolvent_with(m, z, Tolerances::default().tol_cluster)
}

/// Frobenius distance between two matrices of equal shape.
pub fn diff_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, rng};

    fn diag(values: &[Complex64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
    }

    #[test]
    fn schur_of_near_scalar_matrix() {
        let mut r = rng(5);
        let u = crate::random::random_unitary(&mut r, 20);
        let lambda = c64(-1.03, -1.07);
        let m = &u * (identity(20) * lambda) * u.adjoint();
        let (q, t) = schur(&m).unwrap();
        assert!(diff_norm(&(&q * &t * q.adjoint()), &m) < 1e-13);
        assert!(eigenvalues(&m).unwrap().iter().all(|z| (z - lambda).norm() < 1e-13));
        assert_eq!(schur(&(identity(3) * lambda)).unwrap().1, identity(3) * lambda);
    }

    #[test]
    fn operator_norm_examples() {
        let d = diag(&[c64(3.0, 0.0), c64(0.0, -4.0)]);
        assert!((operator_norm(&d) - 4.0).abs() < 1e-14);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(2, 2)), 0.0);
        let n = ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        assert!((operator_norm(&n) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hs_norm_examples() {
        assert!((hs_norm(&diag(&[c64(3.0, 0.0), c64(4.0, 0.0)])) - 5.0).abs() < 1e-15);
        assert!((hs_norm(&identity(7)) - 7f64.sqrt()).abs() < 1e-15);
        let ones = ComplexMatrix::from_element(2, 2, c64(1.0, 0.0));
        assert!((hs_norm(&ones) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adjoint_examples() {
        let m = ComplexMatrix::from_element(1, 1, c64(0.0, 1.0));
        assert_eq!(adjoint(&m)[(0, 0)], c64(0.0, -1.0));
        let s = ComplexMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(2.0, 0.0), c64(5.0, 0.0)]);
        assert_eq!(adjoint(&s), s);
        let mut r = rng(3);
        let m = random_matrix(&mut r, 4, 6);
        assert_eq!(adjoint(&adjoint(&m)), m);
    }

    #[test]
    fn resolvent_examples() {
        let r = resolvent(&ComplexMatrix::from_element(1, 1, c64(2.0, 0.0)), c64(0.0, 0.0)).unwrap();
        assert!((r[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-15);

        let r = resolvent(&diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]), c64(3.0, 0.0)).unwrap();
        assert!(diff_norm(&r, &diag(&[c64(-0.5, 0.0), c64(-1.0, 0.0)])) < 1e-15);

        let n = ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let r = resolvent(&n, c64(1.0, 0.0)).unwrap();
        let expected = ComplexMatrix::from_row_slice(2, 2, &[c64(-1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)]);
        assert!(diff_norm(&r, &expected) < 1e-15);
    }

    #[test]
    fn resolvent_at_eigenvalue_is_singular() {
        let d = diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]);
        assert!(matches!(resolvent(&d, c64(2.0, 0.0)), Err(Error::SingularResolvent { .. })));
        assert!(matches!(resolvent(&d, c64(2.0, 1e-12)), Err(Error::SingularResolvent { .. })));
        assert!(resolvent(&d, c64(2.0, 1e-3)).is_ok());
    }

    #[test]
    fn resolvent_identity_on_random_inputs() {
        let mut r = rng(11);
        for n in [1, 3, 8, 15] {
            let m = random_matrix(&mut r, n, n);
            let (z, w) = (c64(4.0, 1.0), c64(-3.5, 2.0));
            let rz = resolvent(&m, z).unwrap();
            let rw = resolvent(&m, w).unwrap();
            let lhs = &rz - &rw;
            let rhs = (&rz * &rw) * (z - w);
            assert!(diff_norm(&lhs, &rhs) <= 1e-12 * (1.0 + rhs.norm()));
            let check = shifted(&m, z) * &rz - identity(n);
            assert!(check.norm() < 1e-12);
        }
    }

    #[test]
    fn right_division_matches_resolvent_product() {
        let mut r = rng(5);
        let m = random_matrix(&mut r, 5, 5);
        let d = random_matrix(&mut r, 3, 5);
        let z = c64(3.0, -2.0);
        let y = right_divide_shifted(&d, &m, z, 1e-8).unwrap();
        let expected = &d * resolvent(&m, z).unwrap();
        assert!(diff_norm(&y, &expected) < 1e-12);
    }

    #[test]
    fn norm_sandwich_holds() {
        let mut r = rng(17);
        for (rows, cols) in [(1, 1), (2, 5), (6, 3), (10, 10)] {
            let m = random_matrix(&mut r, rows, cols);
            let op = operator_norm(&m);
            let hs = hs_norm(&m);
            assert!(op <= hs * (1.0 + 1e-14));
            assert!(hs <= (rows.min(cols) as f64).sqrt() * op * (1.0 + 1e-14));
        }
    }

    #[test]
    fn validate_rejects_nan_and_empty() {
        let mut m = identity(2);
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(validate(&m, "M").is_err());
        assert!(validate(&ComplexMatrix::zeros(0, 3), "M").is_err());
        assert!(validate(&identity(2), "M").is_ok());
    }

    #[test]
    fn normality() {
        let n = ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        assert!(!is_normal(&n, 1e-10));
        assert!(is_normal(&diag(&[c64(1.0, 2.0), c64(0.0, -1.0)]), 1e-10));
    }
}
