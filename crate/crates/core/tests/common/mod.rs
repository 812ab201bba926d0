#![allow(dead_code)]

use opint_core::random::{nonnormal_with_spectrum, normal_with_spectrum, random_matrix, rng, unit_box, SeededRng};
use opint_core::riccati::RiccatiProblem;
use opint_core::sylvester::SylvesterProblem;
use opint_core::{c64, linalg, Complex64, ComplexMatrix, Rect, SpectralMeasure, Tolerances};
use rand::Rng;

pub fn diag(values: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn scalar(v: f64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, c64(v, 0.0))
}

/// Random normal `n×n` matrix with eigenvalues in `[-spread, spread)²`.
/// With `repeated`, only a random number of distinct eigenvalues is drawn
/// and each is used several times.
pub fn normal_matrix(r: &mut SeededRng, n: usize, spread: f64, repeated: bool) -> (ComplexMatrix, Vec<Complex64>) {
    let distinct = if repeated { r.random_range(1..=n) } else { n };
    let pool: Vec<Complex64> = (0..distinct).map(|_| unit_box(r) * spread).collect();
    let eigs: Vec<Complex64> = (0..n).map(|i| pool[i % distinct]).collect();
    (normal_with_spectrum(r, &eigs), eigs)
}

/// `n` points in `[-radius, radius)²`, each at distance at least `gap` from `avoid`.
pub fn spectrum_avoiding(r: &mut SeededRng, n: usize, avoid: &[Complex64], gap: f64, radius: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = unit_box(r) * radius;
        if avoid.iter().all(|w| (w - z).norm() >= gap) {
            out.push(z);
        }
    }
    out
}

pub fn measure(c: &ComplexMatrix) -> SpectralMeasure {
    SpectralMeasure::from_normal(c, &Tolerances::default()).expect("normal by construction")
}

/// Rectangle with the spectrum strictly inside and edges at a random offset.
pub fn enclosing_rect(r: &mut SeededRng, eigs: &[Complex64]) -> Rect {
    Rect::enclosing(eigs, 0.05 + 0.2 * r.random::<f64>()).expect("nonempty spectrum")
}

/// Sylvester instance: `C` normal `k×k` with spectrum in the unit box, `A`
/// `h×h` with spectrum at distance at least `gap` from it.
pub fn sylvester_instance(seed: u64, h: usize, k: usize, gap: f64, normal_a: bool) -> SylvesterProblem {
    let mut r = rng(seed);
    let repeated = r.random_bool(0.3);
    let (c, eig_c) = normal_matrix(&mut r, k, 1.0, repeated);
    let eig_a = spectrum_avoiding(&mut r, h, &eig_c, gap, 3.0);
    let a = if normal_a {
        normal_with_spectrum(&mut r, &eig_a)
    } else {
        nonnormal_with_spectrum(&mut r, &eig_a, 0.5 / (h as f64).sqrt())
    };
    let d = random_matrix(&mut r, k, h);
    SylvesterProblem::new(a, c, d, &Tolerances::default()).expect("valid instance")
}

/// Riccati instance with `√(‖B‖‖D‖_E)` scaled to `ratio·d`.
pub fn riccati_instance(seed: u64, h: usize, k: usize, ratio: f64, normal_a: bool) -> RiccatiProblem {
    let mut r = rng(seed);
    let repeated = r.random_bool(0.3);
    let (c, eig_c) = normal_matrix(&mut r, k, 1.0, repeated);
    // W(A) contains the convex hull of spec A, so a non-normal A gets its
    // spectrum in a cluster away from spec C.
    let a = if normal_a {
        let eig_a = spectrum_avoiding(&mut r, h, &eig_c, 0.5, 3.0);
        normal_with_spectrum(&mut r, &eig_a)
    } else {
        let center = Complex64::from_polar(4.5, r.random_range(0.0..std::f64::consts::TAU));
        let eig_a: Vec<Complex64> = (0..h).map(|_| center + unit_box(&mut r)).collect();
        nonnormal_with_spectrum(&mut r, &eig_a, 0.3 / (h as f64).sqrt())
    };
    let b = random_matrix(&mut r, h, k);
    let d = random_matrix(&mut r, k, h);
    let base = RiccatiProblem::new(a, b, c, d, &Tolerances::default()).expect("valid instance");
    let cert = opint_core::riccati::certify(&base).expect("B is nonzero");
    let current = (cert.norm_b * cert.enorm_d).sqrt();
    let s = ratio * cert.d / current;
    base.scaled(s, s)
}

/// Random matrix with operator norm `norm`.
pub fn matrix_with_norm(r: &mut SeededRng, rows: usize, cols: usize, norm: f64) -> ComplexMatrix {
    let m = random_matrix(r, rows, cols);
    let n = linalg::operator_norm(&m);
    m * c64(norm / n, 0.0)
}

/// Brute-force E-norm: maximum of `Σ ‖Y*·E(Ωᵢ)·Y‖` over all assignments of
/// atoms to at most `K` disjoint groups, each atom possibly left out.
pub fn e_norm_brute_force(y: &ComplexMatrix, sm: &SpectralMeasure) -> f64 {
    let k = sm.len();
    let labels = k + 1;
    let total = labels.pow(k as u32);
    let yh = y.adjoint();
    let mut best: f64 = 0.0;
    for code in 0..total {
        let mut groups = vec![ComplexMatrix::zeros(sm.dim(), sm.dim()); k];
        let mut c = code;
        for atom in sm.atoms() {
            let label = c % labels;
            c /= labels;
            if label < k {
                groups[label] += &atom.projection;
            }
        }
        let sum: f64 = groups.iter().map(|g| linalg::operator_norm(&(&yh * g * y))).sum();
        best = best.max(sum);
    }
    best.sqrt()
}
