//! Built-in integrands for the `integrate` command.

use opint_core::io::ProblemFile;
use opint_core::stieltjes::OperatorFunction;
use opint_core::{linalg, Complex64, ComplexMatrix};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// `F(z) = D·(A − z)⁻¹` with `A` and `D` from the problem file.
    Resolvent { a: char, d: char },
    /// `F(z) = (Σ cⱼ zʲ)·I`.
    Poly(Vec<Complex64>),
    /// `F(λ, μ) = (pλ + qμ)·I`.
    Affine { p: f64, q: f64 },
}

fn usage(spec: &str, why: &str) -> CliError {
    CliError::Usage(format!("invalid function {spec:?}: {why}"))
}

pub fn parse(spec: &str) -> Result<Builtin, CliError> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| usage(spec, "expected `kind:arguments`"))?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    match kind.trim() {
        "resolvent" => match args.as_slice() {
            [a, d] if a.len() == 1 && d.len() == 1 => Ok(Builtin::Resolvent {
                a: a.chars().next().expect("nonempty"),
                d: d.chars().next().expect("nonempty"),
            }),
            _ => Err(usage(spec, "expected two matrix names, e.g. resolvent:A,D")),
        },
        "poly" => args
            .iter()
            .map(|c| c.parse::<Complex64>().map_err(|_| usage(spec, &format!("bad coefficient {c:?}"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Builtin::Poly),
        "affine" => match args.as_slice() {
            [p, q] => {
                let num = |s: &str| s.parse::<f64>().map_err(|_| usage(spec, &format!("bad number {s:?}")));
                Ok(Builtin::Affine { p: num(p)?, q: num(q)? })
            }
            _ => Err(usage(spec, "expected affine:p,q")),
        },
        other => Err(usage(spec, &format!("unknown kind {other:?}"))),
    }
}

/// Builds the integrand for a measure of dimension `dim`.
pub fn build(builtin: &Builtin, file: &ProblemFile, dim: usize) -> Result<OperatorFunction<'static>, CliError> {
    let finite = |v: f64| v.is_finite();
    match builtin {
        Builtin::Resolvent { a, d } => {
            let a = file.require(*a)?;
            let d = file.require(*d)?;
            linalg::require_square(&a, "resolvent A")?;
            if a.nrows() != dim || d.ncols() != dim {
                return Err(CliError::Usage(format!(
                    "resolvent needs A {dim}x{dim} and D with {dim} columns, got A {}x{} and D {}x{}",
                    a.nrows(),
                    a.ncols(),
                    d.nrows(),
                    d.ncols()
                )));
            }
            let rows = d.nrows();
            Ok(OperatorFunction::of_complex(rows, dim, move |z| {
                // NaN marks a tag on spec A; the study reports it
                linalg::right_divide_shifted(&d, &a, z, 1e-14)
                    .unwrap_or_else(|_| ComplexMatrix::from_element(rows, dim, Complex64::new(f64::NAN, f64::NAN)))
            }))
        }
        Builtin::Poly(coeffs) => {
            if coeffs.is_empty() || !coeffs.iter().all(|c| finite(c.re) && finite(c.im)) {
                return Err(CliError::Usage("poly needs finite coefficients".into()));
            }
            let coeffs = coeffs.clone();
            Ok(OperatorFunction::of_complex(dim, dim, move |z| {
                let value = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
                linalg::identity(dim) * value
            }))
        }
        &Builtin::Affine { p, q } => {
            if !finite(p) || !finite(q) {
                return Err(CliError::Usage("affine needs finite coefficients".into()));
            }
            Ok(
                OperatorFunction::new(dim, dim, move |l, m| linalg::identity(dim) * Complex64::new(p * l + q * m, 0.0))
                    .with_lipschitz(p.abs().max(q.abs()), 0.0),
            )
        }
    }
}
