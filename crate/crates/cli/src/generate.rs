//! Seeded random problem files.

use clap::ValueEnum;
use opint_core::io::ProblemFile;
use opint_core::random::{nonnormal_with_spectrum, random_matrix, random_normal, rng, unit_box};
use opint_core::riccati::{certify, RiccatiProblem};
use opint_core::{linalg, Complex64, Rect, Tolerances};

use crate::{CliError, Emit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// C only.
    Spectral,
    /// C and Y.
    Enorm,
    /// A, C, D with gap at least 0.5.
    Sylvester,
    /// A, B, C, D scaled so that the contraction certificate holds.
    Riccati,
    /// C, A, D and a rect around spec C, for `integrate --function resolvent:A,D`.
    Integrate,
}

fn spectrum_avoiding(r: &mut opint_core::random::SeededRng, n: usize, avoid: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = unit_box(r) * 3.0;
        if avoid.iter().all(|w| (w - z).norm() >= 0.5) {
            out.push(z);
        }
    }
    out
}

pub fn generate(kind: Kind, seed: u64, dim: usize) -> Result<Emit, CliError> {
    if dim == 0 || dim > 512 {
        return Err(CliError::Usage(format!("--dim must lie in 1..=512, got {dim}")));
    }
    let mut r = rng(seed);
    let (c, eig_c) = random_normal(&mut r, dim, 1.0);
    let mut file = ProblemFile {
        seed: Some(seed),
        ..ProblemFile::default()
    }
    .with_matrix('C', &c);
    match kind {
        Kind::Spectral => {}
        Kind::Enorm => file = file.with_matrix('Y', &random_matrix(&mut r, dim, dim)),
        Kind::Sylvester | Kind::Integrate => {
            let eig_a = spectrum_avoiding(&mut r, dim, &eig_c);
            let a = nonnormal_with_spectrum(&mut r, &eig_a, 0.3);
            file = file.with_matrix('A', &a).with_matrix('D', &random_matrix(&mut r, dim, dim));
            if kind == Kind::Integrate {
                file.rect = Some(Rect::enclosing(&eig_c, 0.1)?);
            }
        }
        Kind::Riccati => {
            let eig_a = spectrum_avoiding(&mut r, dim, &eig_c);
            let a = nonnormal_with_spectrum(&mut r, &eig_a, 0.3);
            let b = random_matrix(&mut r, dim, dim);
            let d = random_matrix(&mut r, dim, dim);
            let prob = RiccatiProblem::new(a.clone(), b.clone(), c.clone(), d.clone(), &Tolerances::default())?;
            let cert = certify(&prob)?;
            // √(‖B‖‖D‖_E) = d/4 after scaling both by s
            let s = Complex64::new(0.25 * cert.d / (cert.norm_b * cert.enorm_d).sqrt(), 0.0);
            file = file.with_matrix('A', &a).with_matrix('B', &(b * s)).with_matrix('D', &(d * s));
        }
    }
    debug_assert!(linalg::is_normal(&c, 1e-10));
    Ok(Emit::ok(file.to_json() + "\n"))
}
