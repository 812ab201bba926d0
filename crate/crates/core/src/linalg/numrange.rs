use std::f64::consts::PI;

use num_complex::Complex64;

use super::ComplexMatrix;

/// Support function of the numerical range `W(A)` in direction `θ`:
/// the largest eigenvalue of the Hermitian part of `e^{−iθ}A`.
pub fn numrange_support(a: &ComplexMatrix, theta: f64) -> f64 {
    let rot = Complex64::from_polar(1.0, -theta);
    let rotated = a * rot;
    let herm = (&rotated + rotated.adjoint()) * Complex64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().max()
}

/// Lower bound on `dist(z, W(A))` from `n_angles` support-function samples.
pub fn dist_to_numrange(a: &ComplexMatrix, z: Complex64, n_angles: usize) -> f64 {
    NumericalRange::sample(a, n_angles).distance(z)
}

/// Sampled support function of `W(A)`, reusable across many query points.
///
/// For every direction `θ`, `Re(e^{−iθ}z) − h(θ)` is at most the distance from
/// `z` to the convex set `W(A)`, and the supremum over `θ` equals it when `z`
/// lies outside. Any finite set of directions therefore gives a lower bound.
#[derive(Debug, Clone)]
pub struct NumericalRange {
    matrix: ComplexMatrix,
    angles: Vec<f64>,
    supports: Vec<f64>,
}

const REFINE_ITERS: usize = 48;

impl NumericalRange {
    /// Samples `n_angles` equispaced directions (at least 8).
    pub fn sample(a: &ComplexMatrix, n_angles: usize) -> Self {
        assert!(a.is_square(), "numerical range needs a square matrix");
        let n = n_angles.max(8);
        let angles: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let supports = angles.iter().map(|&t| numrange_support(a, t)).collect();
        Self {
            matrix: a.clone(),
            angles,
            supports,
        }
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    fn gap_at(&self, z: Complex64, theta: f64) -> f64 {
        (Complex64::from_polar(1.0, -theta) * z).re - numrange_support(&self.matrix, theta)
    }

    /// Lower bound on `dist(z, W(A))`, floored at zero.
    ///
    /// The best sampled direction is refined by a golden-section search over
    /// the neighbouring sample interval.
    pub fn distance(&self, z: Complex64) -> f64 {
        let (best_idx, best) = self
            .angles
            .iter()
            .zip(&self.supports)
            .map(|(&t, &h)| (Complex64::from_polar(1.0, -t) * z).re - h)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });

        let step = 2.0 * PI / self.angles.len() as f64;
        let center = self.angles[best_idx];
        let (mut lo, mut hi) = (center - step, center + step);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let mut f1 = self.gap_at(z, x1);
        let mut f2 = self.gap_at(z, x2);
        let mut refined = best.max(f1).max(f2);
        for _ in 0..REFINE_ITERS {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = self.gap_at(z, x1);
                refined = refined.max(f1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = self.gap_at(z, x2);
                refined = refined.max(f2);
            }
        }
        refined.max(0.0)
    }

    /// Lower bound on `dist(W(A), S)` for a finite point set `S`.
    pub fn distance_to_set(&self, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|&z| self.distance(z))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, eigenvalues};
    use crate::random::{random_matrix, random_normal, rng};

    fn diag01() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(0.0, 0.0), c64(1.0, 0.0)]))
    }

    fn jordan2() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)])
    }

    #[test]
    fn support_examples() {
        assert!((numrange_support(&diag01(), 0.0) - 1.0).abs() < 1e-14);
        assert!(numrange_support(&diag01(), PI).abs() < 1e-14);
        for theta in [0.0, 0.3, 1.7, PI, 5.0] {
            assert!((numrange_support(&jordan2(), theta) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn distance_examples() {
        // Distance from i to the segment [0, 1] is 1.
        let d = dist_to_numrange(&diag01(), c64(0.0, 1.0), 720);
        assert!((1.0 - 1e-3..=1.0 + 1e-12).contains(&d));
        assert_eq!(dist_to_numrange(&diag01(), c64(0.5, 0.0), 720), 0.0);
        // W of the 2x2 Jordan block with weight 2 is the closed unit disk.
        let d = dist_to_numrange(&jordan2(), c64(3.0, 0.0), 720);
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distance_nondecreasing_under_doubling() {
        let mut r = rng(21);
        for _ in 0..5 {
            let a = random_matrix(&mut r, 4, 4);
            let z = c64(3.0, -2.5);
            let mut prev = 0.0;
            for n in [8, 16, 32, 64, 128] {
                let d = dist_to_numrange(&a, z, n);
                assert!(d + 1e-12 >= prev, "n={n}: {d} < {prev}");
                prev = d;
            }
        }
    }

    #[test]
    fn distance_bounded_by_eigenvalue_distance() {
        let mut r = rng(8);
        for _ in 0..5 {
            let a = random_matrix(&mut r, 5, 5);
            let z = c64(2.0, 2.0);
            let d = dist_to_numrange(&a, z, 720);
            let eig_min = eigenvalues(&a).unwrap().iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min);
            assert!(d <= eig_min + 1e-12);
        }
    }

    #[test]
    fn normal_support_is_max_over_spectrum() {
        let mut r = rng(4);
        let (c, lambdas) = random_normal(&mut r, 6, 2.0);
        for theta in [0.0, 0.9, 2.2, 4.0] {
            let h = numrange_support(&c, theta);
            let expected = lambdas
                .iter()
                .map(|l| (Complex64::from_polar(1.0, -theta) * l).re)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((h - expected).abs() < 1e-12);
        }
    }
}
