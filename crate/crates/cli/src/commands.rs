use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use opint_core::enorm::check_enorm_sandwich;
use opint_core::io::{serialize_matrix, ProblemFile};
use opint_core::riccati::{self, ContractionCertificate, FixedPointOptions, RiccatiProblem};
use opint_core::spectral::MeasureResiduals;
use opint_core::stieltjes::{exact_right_integral, refine_right, REFINEMENT_TAGS};
use opint_core::sylvester::{self, BoundCheck, Method, SylvesterProblem};
use opint_core::{linalg, ComplexMatrix, Error, SpectralMeasure, Tolerances};
use serde::Serialize;

use crate::{builtin, CliError, Emit, Format, SylvesterMethod};

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = opint_core::io::to_pretty_json(value);
    text.push('\n');
    text
}

#[derive(Serialize)]
struct SpectralReport {
    dim: usize,
    clusters: Vec<[f64; 2]>,
    multiplicities: Vec<usize>,
    residuals: MeasureResiduals,
    max_residual: f64,
    tolerances: Tolerances,
    seed: Option<u64>,
}

pub fn spectral(path: &Path) -> Result<Emit, CliError> {
    let file = ProblemFile::read(path)?;
    let tol = file.tolerances()?;
    let c = file.require('C')?;
    let sm = SpectralMeasure::from_normal(&c, &tol)?;
    let residuals = sm.residuals(&c);
    Ok(Emit::ok(to_json(&SpectralReport {
        dim: sm.dim(),
        clusters: sm.eigenvalues().iter().map(|z| [z.re, z.im]).collect(),
        multiplicities: sm.multiplicities(),
        max_residual: residuals.max(),
        residuals,
        tolerances: tol,
        seed: file.seed,
    })))
}

#[derive(Serialize)]
struct EnormReport {
    op_norm: f64,
    e_norm: f64,
    hs_norm: f64,
    sandwich_holds: bool,
    seed: Option<u64>,
}

pub fn enorm(path: &Path) -> Result<Emit, CliError> {
    let file = ProblemFile::read(path)?;
    let tol = file.tolerances()?;
    let c = file.require('C')?;
    let y = file.require('Y')?;
    let sm = SpectralMeasure::from_normal(&c, &tol)?;
    let s = check_enorm_sandwich(&y, &sm)?;
    let mut emit = Emit::ok(to_json(&EnormReport {
        op_norm: s.op_norm,
        e_norm: s.e_norm,
        hs_norm: s.hs_norm,
        sandwich_holds: s.holds,
        seed: file.seed,
    }));
    if !s.holds {
        emit.note = Some("norm sandwich violated beyond rounding slack".into());
    }
    Ok(emit)
}

#[derive(Serialize)]
struct SylvesterOutput {
    method: Method,
    #[serde(serialize_with = "serialize_matrix")]
    x: ComplexMatrix,
    residual: f64,
    residual_scale: f64,
    dual_residual: f64,
    gap: f64,
    gap_numerical_range: Option<f64>,
    bounds: BTreeMap<String, BoundCheck>,
    nodes: Option<usize>,
    tolerances: Tolerances,
    seed: Option<u64>,
}

pub fn sylvester(path: &Path, method: SylvesterMethod, nodes: usize) -> Result<Emit, CliError> {
    let file = ProblemFile::read(path)?;
    let tol = file.tolerances()?;
    let prob = SylvesterProblem::new(file.require('A')?, file.require('C')?, file.require('D')?, &tol)?;
    let mut report = match method {
        SylvesterMethod::Spectral => sylvester::solve_spectral(&prob)?,
        SylvesterMethod::Kronecker => sylvester::solve_kronecker(&prob)?,
        SylvesterMethod::Double => sylvester::solve_double_spectral(&prob)?,
        SylvesterMethod::Contour => {
            if nodes == 0 {
                return Err(CliError::Usage("--nodes must be positive".into()));
            }
            sylvester::solve_contour(&prob, nodes)?
        }
    };
    let bounds = sylvester::verify_bounds(&prob, &mut report)?;
    let dual = sylvester::dual_residual(&prob, &sylvester::dual_solution(&report.x));
    Ok(Emit::ok(to_json(&SylvesterOutput {
        method: report.method,
        residual: report.residual,
        residual_scale: prob.residual_scale(&report.x),
        dual_residual: dual,
        gap: report.gap_d,
        gap_numerical_range: report.gap_numrange,
        bounds,
        nodes: report.nodes,
        x: report.x,
        tolerances: tol,
        seed: file.seed,
    })))
}

#[derive(Serialize)]
struct CertificateOutput<'a> {
    certificate: &'a ContractionCertificate,
    message: String,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct RiccatiOutput {
    certificate: ContractionCertificate,
    #[serde(serialize_with = "serialize_matrix")]
    x: ComplexMatrix,
    converged: bool,
    iterations: usize,
    residual: f64,
    residual_scale: f64,
    e_norm_x: f64,
    closed_loop_gap: f64,
    observed_contraction: Option<f64>,
    steps: Vec<f64>,
    posterior: BTreeMap<String, BoundCheck>,
    tol: f64,
    tolerances: Tolerances,
    seed: Option<u64>,
}

pub fn riccati(path: &Path, tol: f64, max_iter: usize, override_certificate: bool) -> Result<Emit, CliError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {tol}")));
    }
    if max_iter == 0 {
        return Err(CliError::Usage("--max-iter must be positive".into()));
    }
    let file = ProblemFile::read(path)?;
    let tolerances = file.tolerances()?;
    let prob = RiccatiProblem::new(
        file.require('A')?,
        file.require('B')?,
        file.require('C')?,
        file.require('D')?,
        &tolerances,
    )?;
    let certificate = riccati::certify(&prob)?;
    if !certificate.condition_ok && !override_certificate {
        let err = Error::Uncertified {
            lhs: (certificate.norm_b * certificate.enorm_d).sqrt(),
            half_gap: 0.5 * certificate.d,
        };
        return Ok(Emit {
            text: to_json(&CertificateOutput {
                certificate: &certificate,
                message: err.to_string(),
                seed: file.seed,
            }),
            code: 3,
            note: Some(format!("{err}; rerun with --override-certificate to iterate anyway")),
        });
    }
    let opts = FixedPointOptions {
        x0: None,
        tol,
        max_iter,
        override_certificate,
    };
    let report = riccati::solve_fixed_point(&prob, &opts)?;
    let posterior = riccati::posterior_check(&prob, &report)?;
    let closed_loop_gap = riccati::closed_loop_gap(&prob, &report.x)?;
    Ok(Emit::ok(to_json(&RiccatiOutput {
        certificate: report.certificate,
        converged: report.converged,
        iterations: report.iterations,
        residual: report.residual,
        residual_scale: report.residual_scale,
        e_norm_x: report.enorm_x,
        closed_loop_gap,
        observed_contraction: report.observed_contraction,
        steps: report.steps,
        posterior,
        x: report.x,
        tol,
        tolerances,
        seed: file.seed,
    })))
}

pub const CSV_HEADER: &str = "level,m,n,mesh,diff_prev,err_vs_exact";

#[derive(Serialize)]
struct LevelOutput {
    level: usize,
    m: usize,
    n: usize,
    mesh: f64,
    diff_prev: Option<f64>,
    err_vs_exact: f64,
}

#[derive(Serialize)]
struct IntegrateOutput {
    function: String,
    levels: Vec<LevelOutput>,
    converged: bool,
    tol: f64,
    #[serde(serialize_with = "serialize_matrix")]
    value: ComplexMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    exact: ComplexMatrix,
    seed: Option<u64>,
}

pub fn integrate(path: &Path, spec: &str, grid_levels: usize, tol: f64, format: Format) -> Result<Emit, CliError> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
    }
    let builtin = builtin::parse(spec)?;
    let file = ProblemFile::read(path)?;
    let tolerances = file.tolerances()?;
    let c = file.require('C')?;
    let rect = file.rect()?;
    let sm = SpectralMeasure::from_normal(&c, &tolerances)?;
    let f = builtin::build(&builtin, &file, sm.dim())?;
    let exact = exact_right_integral(&f, &sm, &rect)?;
    let report = refine_right(&f, &sm, &rect, tol, grid_levels, REFINEMENT_TAGS)?;
    if !report.levels.iter().all(|l| l.value.iter().all(|v| v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidInput("the integrand is singular at a grid tag".into()).into());
    }

    let levels: Vec<LevelOutput> = report
        .levels
        .iter()
        .map(|l| LevelOutput {
            level: l.level,
            m: l.m,
            n: l.n,
            mesh: l.mesh,
            diff_prev: l.diff_prev,
            err_vs_exact: linalg::operator_norm(&(&l.value - &exact)),
        })
        .collect();

    let text = match format {
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for l in &levels {
                // Debug formatting is the shortest round-trip form
                let diff = l.diff_prev.map(|d| format!("{d:?}")).unwrap_or_default();
                writeln!(out, "{},{},{},{:?},{},{:?}", l.level, l.m, l.n, l.mesh, diff, l.err_vs_exact).expect("string write");
            }
            writeln!(out, "# {}", if report.converged { "converged" } else { "not converged" }).expect("string write");
            out
        }
        Format::Json => to_json(&IntegrateOutput {
            function: spec.to_string(),
            levels,
            converged: report.converged,
            tol,
            value: report.value().clone(),
            exact,
            seed: file.seed,
        }),
    };
    if report.converged {
        return Ok(Emit::ok(text));
    }
    let last = report.diffs().last().copied().unwrap_or(f64::NAN);
    Ok(Emit {
        text,
        code: 4,
        note: Some(
            Error::NoConvergence {
                levels: report.levels.len() - 1,
                last_diff: last,
            }
            .to_string(),
        ),
    })
}

/// Reads an `x` matrix back from a report.
#[cfg(test)]
pub fn matrix_from_report(report: &serde_json::Value, key: &str) -> ComplexMatrix {
    let m: opint_core::io::MatrixJson = serde_json::from_value(report[key].clone()).expect("matrix field");
    m.to_matrix().expect("valid matrix")
}
