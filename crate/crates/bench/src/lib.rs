//! Seeded benchmark inputs shared by the criterion targets.

use opint_core::random::{nonnormal_with_spectrum, normal_with_spectrum, random_matrix, random_normal, rng, unit_box};
use opint_core::riccati::{certify, RiccatiProblem};
use opint_core::sylvester::SylvesterProblem;
use opint_core::{Complex64, ComplexMatrix, Tolerances};

pub fn normal(seed: u64, n: usize) -> ComplexMatrix {
    random_normal(&mut rng(seed), n, 1.0).0
}

/// `C` normal with spectrum in the unit box, `A` with spectrum on a ring of
/// radius 3 so the gap stays near 1 at every size.
pub fn sylvester(seed: u64, h: usize, k: usize, normal_a: bool) -> SylvesterProblem {
    let mut r = rng(seed);
    let (c, _) = random_normal(&mut r, k, 1.0);
    let eig_a: Vec<Complex64> = (0..h)
        .map(|j| Complex64::from_polar(3.0, std::f64::consts::TAU * j as f64 / h as f64) + unit_box(&mut r) * 0.2)
        .collect();
    let a = if normal_a {
        normal_with_spectrum(&mut r, &eig_a)
    } else {
        nonnormal_with_spectrum(&mut r, &eig_a, 0.3 / (h as f64).sqrt())
    };
    let d = random_matrix(&mut r, k, h);
    SylvesterProblem::new(a, c, d, &Tolerances::default()).expect("benchmark instance is valid")
}

/// Riccati instance with `√(‖B‖‖D‖_E) = d/4`.
pub fn riccati(seed: u64, h: usize, k: usize) -> RiccatiProblem {
    let base = sylvester(seed, h, k, true);
    let b = random_matrix(&mut rng(seed ^ 0xb), h, k);
    let prob = RiccatiProblem::new(base.a().clone(), b, base.c().clone(), base.d().clone(), &Tolerances::default())
        .expect("benchmark instance is valid");
    let cert = certify(&prob).expect("B is nonzero");
    let s = 0.25 * cert.d / (cert.norm_b * cert.enorm_d).sqrt();
    prob.scaled(s, s)
}
