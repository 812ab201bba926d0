//! Certified fixed-point solution of the Riccati equation `XA − CX + XBX = D`.
//!
//! A solution with `spec(A + BX)` separated from `spec C` is a fixed point of
//! `F(X) = Σₖ Pₖ·D·(A + BX − ζₖ)⁻¹`. When `√(‖B‖·‖D‖_E) < d/2`, with `d` the
//! distance from `spec C` to `W(A)` (or to `spec A` for normal `A`), `F` is a
//! strict contraction of every ball `‖X‖ ≤ r` with
//!
//! ```text
//! (d/2 − √(d²/4 − ‖B‖‖D‖_E))/‖B‖ ≤ r < (d − √(‖B‖‖D‖_E))/‖B‖
//! ```
//!
//! into itself, and the unique fixed point lies in the smallest such ball.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::enorm::e_norm;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, NumericalRange};
use crate::spectral::SpectralMeasure;
use crate::sylvester::{pairwise_distance, BoundCheck, BoundStatus, BOUND_SLACK, NUMRANGE_ANGLES};
use crate::tolerances::Tolerances;

/// `XA − CX + XBX = D` with `A` (h×h), `B` (h×k), normal `C` (k×k), `D` (k×h).
#[derive(Debug, Clone)]
pub struct RiccatiProblem {
    a: ComplexMatrix,
    b: ComplexMatrix,
    c: ComplexMatrix,
    d: ComplexMatrix,
    sm_c: SpectralMeasure,
    tol: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    /// `d` is a sampled lower bound on `dist(W(A), spec C)`.
    NumericalRange,
    /// `A` is normal and `d = dist(spec A, spec C)`.
    NormalA,
}

/// Quantitative data of the existence theorem for one problem.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionCertificate {
    pub mode: CertificateMode,
    pub d: f64,
    pub norm_b: f64,
    pub enorm_d: f64,
    /// `√(‖B‖·‖D‖_E) < d/2`.
    pub condition_ok: bool,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    /// `‖B‖‖D‖_E / (d − ‖B‖·r_min)²`.
    pub q_at_rmin: Option<f64>,
    /// A-priori bound on `‖X‖` (equal to `r_min`).
    pub apriori_norm_x: Option<f64>,
    /// A-priori bound on `‖X‖_E`.
    pub apriori_enorm_x: Option<f64>,
    /// Either `‖B‖ < d/2 ∧ ‖B‖ + ‖D‖_E < d` or `‖B‖ ≥ d/2 ∧ ‖D‖_E < d²/(4‖B‖)`,
    /// under which the solution is a strict contraction.
    pub strict_contraction_predicted: bool,
}

#[derive(Debug, Clone)]
pub struct FixedPointOptions {
    /// Starting iterate; zero when absent.
    pub x0: Option<ComplexMatrix>,
    pub tol: f64,
    pub max_iter: usize,
    /// Iterate even when the certificate fails (no guarantee).
    pub override_certificate: bool,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            x0: None,
            tol: 1e-12,
            max_iter: 200,
            override_certificate: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RiccatiReport {
    pub x: ComplexMatrix,
    pub iterations: usize,
    /// `‖XA − CX + XBX − D‖`.
    pub residual: f64,
    /// `(‖A‖ + ‖C‖ + ‖B‖‖X‖)·‖X‖ + ‖D‖`.
    pub residual_scale: f64,
    pub enorm_x: f64,
    pub certificate: ContractionCertificate,
    pub converged: bool,
    /// `‖X_{n+1} − X_n‖` for every iteration.
    pub steps: Vec<f64>,
    /// Largest ratio of successive steps while both iterates lay in the
    /// `r_min`-ball (all steps when uncertified); ratios of steps below the
    /// rounding floor are ignored.
    pub observed_contraction: Option<f64>,
    pub tol: f64,
}

impl RiccatiProblem {
    pub fn new(
        a: ComplexMatrix,
        b: ComplexMatrix,
        c: ComplexMatrix,
        d: ComplexMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        for (m, name) in [(&a, "A"), (&b, "B"), (&c, "C"), (&d, "D")] {
            linalg::validate(m, name)?;
        }
        linalg::require_square(&a, "Riccati A")?;
        linalg::require_square(&c, "Riccati C")?;
        let (h, k) = (a.nrows(), c.nrows());
        let expect = |m: &ComplexMatrix, name: &'static str, rows: usize, cols: usize| {
            if m.shape() == (rows, cols) {
                Ok(())
            } else {
                Err(Error::shape(name, format!("{rows}x{cols}"), format!("{}x{}", m.nrows(), m.ncols())))
            }
        };
        expect(&b, "Riccati B", h, k)?;
        expect(&d, "Riccati D", k, h)?;
        let sm_c = SpectralMeasure::from_normal(&c, tol)?;
        Ok(Self { a, b, c, d, sm_c, tol: *tol })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn d(&self) -> &ComplexMatrix {
        &self.d
    }

    pub fn measure_c(&self) -> &SpectralMeasure {
        &self.sm_c
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Same `A`, `C` with `B` and `D` multiplied by the given factors.
    pub fn scaled(&self, b_factor: f64, d_factor: f64) -> Self {
        Self {
            b: &self.b * num_complex::Complex64::new(b_factor, 0.0),
            d: &self.d * num_complex::Complex64::new(d_factor, 0.0),
            ..self.clone()
        }
    }

    pub fn residual_scale(&self, x: &ComplexMatrix) -> f64 {
        let nx = linalg::operator_norm(x);
        (linalg::operator_norm(&self.a) + linalg::operator_norm(&self.c) + linalg::operator_norm(&self.b) * nx) * nx
            + linalg::operator_norm(&self.d)
    }
}

/// Computes the contraction certificate.
pub fn certify(prob: &RiccatiProblem) -> Result<ContractionCertificate> {
    let norm_b = linalg::operator_norm(&prob.b);
    if norm_b == 0.0 {
        return Err(Error::ZeroB);
    }
    let atoms = prob.sm_c.eigenvalues();
    let (mode, d) = if linalg::is_normal(&prob.a, prob.tol.tol_normal) {
        (CertificateMode::NormalA, pairwise_distance(&linalg::eigenvalues(&prob.a)?, &atoms))
    } else {
        (
            CertificateMode::NumericalRange,
            NumericalRange::sample(&prob.a, NUMRANGE_ANGLES).distance_to_set(&atoms),
        )
    };
    let enorm_d = e_norm(&prob.d, &prob.sm_c)?;
    Ok(certificate_from(mode, d, norm_b, enorm_d))
}

/// Certificate from the three scalars `d`, `‖B‖ > 0` and `‖D‖_E`.
pub fn certificate_from(mode: CertificateMode, d: f64, norm_b: f64, enorm_d: f64) -> ContractionCertificate {
    let product = norm_b * enorm_d;
    let condition_ok = product.sqrt() < 0.5 * d;
    let (mut r_min, mut r_max, mut q) = (None, None, None);
    if condition_ok {
        let disc = (0.25 * d * d - product).sqrt();
        // (d/2 − disc)/‖B‖ without cancellation
        let lo = enorm_d / (0.5 * d + disc);
        r_min = Some(lo);
        r_max = Some((d - product.sqrt()) / norm_b);
        q = Some(product / (d - norm_b * lo).powi(2));
    }
    let strict_contraction_predicted = condition_ok
        && ((norm_b < 0.5 * d && norm_b + enorm_d < d) || (norm_b >= 0.5 * d && enorm_d < d * d / (4.0 * norm_b)));
    ContractionCertificate {
        mode,
        d,
        norm_b,
        enorm_d,
        condition_ok,
        r_min,
        r_max,
        q_at_rmin: q,
        apriori_norm_x: r_min,
        apriori_enorm_x: r_min,
        strict_contraction_predicted,
    }
}

/// `F(X) = Σₖ Pₖ·D·(A + BX − ζₖ)⁻¹`.
pub fn fixed_point_map(prob: &RiccatiProblem, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let closed = &prob.a + &prob.b * x;
    let mut out = ComplexMatrix::zeros(prob.d.nrows(), prob.d.ncols());
    for atom in prob.sm_c.atoms() {
        let pd = &atom.projection * &prob.d;
        out += linalg::right_divide_shifted(&pd, &closed, atom.eigenvalue, prob.tol.tol_cluster)?;
    }
    Ok(out)
}

/// `dist(spec(A + BX), spec C)`.
pub fn closed_loop_gap(prob: &RiccatiProblem, x: &ComplexMatrix) -> Result<f64> {
    let closed = &prob.a + &prob.b * x;
    Ok(pairwise_distance(&linalg::eigenvalues(&closed)?, &prob.sm_c.eigenvalues()))
}

/// `‖XA − CX + XBX − D‖`.
pub fn riccati_residual(prob: &RiccatiProblem, x: &ComplexMatrix) -> f64 {
    linalg::operator_norm(&(x * &prob.a - &prob.c * x + x * &prob.b * x - &prob.d))
}

/// `‖YC* − A*Y + YB*Y − D*‖`, which equals the primal residual at `Y = −X*`.
pub fn dual_residual(prob: &RiccatiProblem, y: &ComplexMatrix) -> f64 {
    linalg::operator_norm(
        &(y * prob.c.adjoint() - prob.a.adjoint() * y + y * prob.b.adjoint() * y - prob.d.adjoint()),
    )
}

/// Picard iteration `X_{n+1} = F(X_n)` until `‖X_{n+1} − X_n‖ ≤ tol·max(1, ‖X_n‖)`.
pub fn solve_fixed_point(prob: &RiccatiProblem, opts: &FixedPointOptions) -> Result<RiccatiReport> {
    let certificate = certify(prob)?;
    if !certificate.condition_ok && !opts.override_certificate {
        return Err(Error::Uncertified {
            lhs: (certificate.norm_b * certificate.enorm_d).sqrt(),
            half_gap: 0.5 * certificate.d,
        });
    }
    let shape = prob.d.shape();
    let mut x = match &opts.x0 {
        Some(x0) if x0.shape() != shape => {
            return Err(Error::shape(
                "initial iterate",
                format!("{}x{}", shape.0, shape.1),
                format!("{}x{}", x0.nrows(), x0.ncols()),
            ))
        }
        Some(x0) => x0.clone(),
        None => ComplexMatrix::zeros(shape.0, shape.1),
    };

    let mut steps = Vec::new();
    let mut norms = vec![linalg::operator_norm(&x)];
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let next = fixed_point_map(prob, &x)?;
        let step = linalg::operator_norm(&(&next - &x));
        let previous_norm = *norms.last().expect("norms is never empty");
        steps.push(step);
        norms.push(linalg::operator_norm(&next));
        x = next;
        if step <= opts.tol * previous_norm.max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterExceeded {
            iterations: opts.max_iter,
            last_step: steps.last().copied().unwrap_or(f64::NAN),
        });
    }

    let norm_x = *norms.last().expect("norms is never empty");
    let floor = 1e-11 * norm_x.max(1.0);
    let in_ball = |n: f64| certificate.r_min.is_none_or(|r| n <= r * (1.0 + 1e-9) + 1e-15);
    // steps[i] = ‖X_{i+1} − X_i‖; ratio i compares steps[i] with steps[i−1]
    // and involves iterates X_{i−1}, X_i, X_{i+1}.
    let observed_contraction = (1..steps.len())
        .filter(|&i| steps[i - 1] > floor && in_ball(norms[i - 1]) && in_ball(norms[i]))
        .map(|i| steps[i] / steps[i - 1])
        .reduce(f64::max);

    Ok(RiccatiReport {
        iterations: steps.len(),
        residual: riccati_residual(prob, &x),
        residual_scale: prob.residual_scale(&x),
        enorm_x: e_norm(&x, &prob.sm_c)?,
        x,
        certificate,
        converged,
        steps,
        observed_contraction,
        tol: opts.tol,
    })
}

/// A-posteriori checks on a converged solution:
///
/// * `qec0`: `‖X‖_E ≤ ‖D‖_E · maxₖ ‖(A + BX − ζₖ)⁻¹‖`;
/// * `qec1`: `‖X‖_E ≤ ‖D‖_E / (d − ‖B‖‖X‖)` when the denominator is positive;
/// * `qnest`, `qest1`, `qest2`: `‖X‖ ≤ r_min`, `‖X‖_E ≤ r_min`, `‖X‖ < r_max`;
/// * `xstrict`: `‖X‖ ≤ ‖X‖_E < 1` when a strict contraction is predicted.
pub fn posterior_check(prob: &RiccatiProblem, report: &RiccatiReport) -> Result<BTreeMap<String, BoundCheck>> {
    let cert = &report.certificate;
    let x = &report.x;
    let norm_x = linalg::operator_norm(x);
    let e_x = report.enorm_x;
    let slack = |b: f64| (BOUND_SLACK + 10.0 * report.tol) * b.max(1.0);
    let mut out = BTreeMap::new();

    let closed = &prob.a + &prob.b * x;
    let mut sup_resolvent: f64 = 0.0;
    for z in prob.sm_c.eigenvalues() {
        let r = linalg::resolvent_with(&closed, z, prob.tol.tol_cluster)?;
        sup_resolvent = sup_resolvent.max(linalg::operator_norm(&r));
    }
    let b = cert.enorm_d * sup_resolvent;
    out.insert("qec0".to_string(), BoundCheck::compare(e_x, b, slack(b)));

    let denom = cert.d - cert.norm_b * norm_x;
    out.insert(
        "qec1".to_string(),
        if denom > 0.0 {
            let b = cert.enorm_d / denom;
            BoundCheck::compare(e_x, b, slack(b))
        } else {
            BoundCheck::skipped(e_x)
        },
    );

    if let (Some(r_min), Some(r_max)) = (cert.r_min, cert.r_max) {
        out.insert("qnest".to_string(), BoundCheck::compare(norm_x, r_min, slack(r_min)));
        out.insert("qest1".to_string(), BoundCheck::compare(e_x, r_min, slack(r_min)));
        let status = if norm_x < r_max { BoundStatus::Pass } else { BoundStatus::Fail };
        out.insert("qest2".to_string(), BoundCheck { bound: r_max, observed: norm_x, status });
    }

    if cert.strict_contraction_predicted {
        let ordered = norm_x <= e_x * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        let status = if ordered && e_x < 1.0 { BoundStatus::Pass } else { BoundStatus::Fail };
        out.insert("xstrict".to_string(), BoundCheck { bound: 1.0, observed: e_x, status });
    }
    Ok(out)
}
