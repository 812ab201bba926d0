//! Seeded generators for test corpora and benchmarks.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::ComplexMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex number with real and imaginary parts uniform in `[-1, 1)`.
pub fn unit_box<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| unit_box(rng))
}

/// Haar-like unitary: Q factor of a random matrix with the phases of `R`'s
/// diagonal divided out.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = random_matrix(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// `U·diag(eigs)·U*` for a random unitary `U`.
pub fn normal_with_spectrum<R: Rng>(rng: &mut R, eigs: &[Complex64]) -> ComplexMatrix {
    let u = random_unitary(rng, eigs.len());
    let d = ComplexMatrix::from_diagonal(&DVector::from_column_slice(eigs));
    &u * d * u.adjoint()
}

/// Random normal matrix with eigenvalues uniform in the square `[-spread, spread)²`.
pub fn random_normal<R: Rng>(rng: &mut R, n: usize, spread: f64) -> (ComplexMatrix, Vec<Complex64>) {
    let eigs: Vec<Complex64> = (0..n).map(|_| unit_box(rng) * spread).collect();
    (normal_with_spectrum(rng, &eigs), eigs)
}

/// Non-normal matrix `U·T·U*` where `T` is upper triangular with the given
/// diagonal and strictly upper part uniform with magnitude `coupling`.
pub fn nonnormal_with_spectrum<R: Rng>(
    rng: &mut R,
    eigs: &[Complex64],
    coupling: f64,
) -> ComplexMatrix {
    let n = eigs.len();
    let u = random_unitary(rng, n);
    let t = ComplexMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => eigs[i],
        std::cmp::Ordering::Less => unit_box(rng) * coupling,
        std::cmp::Ordering::Greater => Complex64::new(0.0, 0.0),
    });
    &u * t * u.adjoint()
}
