//! Operator Riemann–Stieltjes sums over rectangular grid partitions.
//!
//! For a spectral measure with finitely many atoms only cells containing an
//! eigenvalue contribute, so a sum costs one function evaluation per occupied
//! cell regardless of how fine the grid is.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::spectral::{Rect, SpectralMeasure};

type EvalFn<'a> = dyn Fn(f64, f64) -> ComplexMatrix + Send + Sync + 'a;

/// Operator-valued function `F(λ, μ)` of fixed shape, with optional
/// Lipschitz constants `γ₁` (first differences) and `γ₂` (mixed differences).
pub struct OperatorFunction<'a> {
    rows: usize,
    cols: usize,
    eval: Box<EvalFn<'a>>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
}

impl std::fmt::Debug for OperatorFunction<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFunction")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("gamma1", &self.gamma1)
            .field("gamma2", &self.gamma2)
            .finish_non_exhaustive()
    }
}

impl<'a> OperatorFunction<'a> {
    pub fn new(
        rows: usize,
        cols: usize,
        eval: impl Fn(f64, f64) -> ComplexMatrix + Send + Sync + 'a,
    ) -> Self {
        Self {
            rows,
            cols,
            eval: Box::new(eval),
            gamma1: None,
            gamma2: None,
        }
    }

    /// Function of `z = λ + iμ`.
    pub fn of_complex(
        rows: usize,
        cols: usize,
        f: impl Fn(Complex64) -> ComplexMatrix + Send + Sync + 'a,
    ) -> Self {
        Self::new(rows, cols, move |l, m| f(Complex64::new(l, m)))
    }

    pub fn constant(value: ComplexMatrix) -> Self {
        let (rows, cols) = value.shape();
        let mut f = Self::new(rows, cols, move |_, _| value.clone());
        f.gamma1 = Some(0.0);
        f.gamma2 = Some(0.0);
        f
    }

    pub fn with_lipschitz(mut self, gamma1: f64, gamma2: f64) -> Self {
        assert!(gamma1 >= 0.0 && gamma2 >= 0.0, "Lipschitz constants must be nonnegative");
        self.gamma1 = Some(gamma1);
        self.gamma2 = Some(gamma2);
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn eval(&self, lambda: f64, mu: f64) -> Result<ComplexMatrix> {
        let v = (self.eval)(lambda, mu);
        if v.shape() != (self.rows, self.cols) {
            return Err(Error::shape(
                "operator function value",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", v.nrows(), v.ncols()),
            ));
        }
        Ok(v)
    }

    pub fn eval_at(&self, z: Complex64) -> Result<ComplexMatrix> {
        self.eval(z.re, z.im)
    }

    /// Pointwise adjoint `(λ, μ) ↦ F(λ, μ)*`.
    pub fn adjoint_values(&self) -> OperatorFunction<'_> {
        OperatorFunction {
            rows: self.cols,
            cols: self.rows,
            eval: Box::new(move |l, m| (self.eval)(l, m).adjoint()),
            gamma1: self.gamma1,
            gamma2: self.gamma2,
        }
    }

    /// `(λ, μ) ↦ (λ + iμ)·F(λ, μ)`.
    pub fn times_z(&self) -> OperatorFunction<'_> {
        OperatorFunction::new(self.rows, self.cols, move |l, m| (self.eval)(l, m) * Complex64::new(l, m))
    }
}

/// Grid lines along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    kind: AxisKind,
    /// Interior lines moved off a colliding eigenvalue coordinate.
    shifted: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum AxisKind {
    Uniform { lo: f64, hi: f64, cells: usize },
    Explicit(Vec<f64>),
}

impl GridAxis {
    pub fn uniform(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || cells == 0 {
            return Err(Error::InvalidInput(format!(
                "uniform axis needs finite lo < hi and at least one cell, got [{lo}, {hi}) with {cells}"
            )));
        }
        Ok(Self {
            kind: AxisKind::Uniform { lo, hi, cells },
            shifted: BTreeMap::new(),
        })
    }

    pub fn explicit(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(
                "grid points must be finite, strictly increasing, and at least two".into(),
            ));
        }
        Ok(Self {
            kind: AxisKind::Explicit(points),
            shifted: BTreeMap::new(),
        })
    }

    pub fn cells(&self) -> usize {
        match &self.kind {
            AxisKind::Uniform { cells, .. } => *cells,
            AxisKind::Explicit(p) => p.len() - 1,
        }
    }

    fn base_line(&self, i: usize) -> f64 {
        match &self.kind {
            AxisKind::Uniform { lo, hi, cells } => {
                if i == *cells {
                    *hi
                } else {
                    lo + (hi - lo) * (i as f64 / *cells as f64)
                }
            }
            AxisKind::Explicit(p) => p[i],
        }
    }

    /// Position of line `i`, `0 ≤ i ≤ cells`.
    pub fn line(&self, i: usize) -> f64 {
        self.shifted.get(&i).copied().unwrap_or_else(|| self.base_line(i))
    }

    pub fn lo(&self) -> f64 {
        self.line(0)
    }

    pub fn hi(&self) -> f64 {
        self.line(self.cells())
    }

    /// Largest cell width.
    pub fn max_width(&self) -> f64 {
        let width = |j: usize| self.line(j + 1) - self.line(j);
        match &self.kind {
            // Only cells next to a shifted line differ from the nominal width.
            AxisKind::Uniform { lo, hi, cells } => self
                .shifted
                .keys()
                .flat_map(|&i| [i - 1, i])
                .map(width)
                .fold((hi - lo) / *cells as f64, f64::max),
            AxisKind::Explicit(_) => (0..self.cells()).map(width).fold(0.0, f64::max),
        }
    }

    /// Cell `j` with `line(j) ≤ x < line(j+1)`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let cells = self.cells();
        if !(self.lo() <= x && x < self.hi()) {
            return None;
        }
        let mut j = match &self.kind {
            AxisKind::Uniform { lo, hi, cells } => {
                let guess = ((x - lo) / (hi - lo) * *cells as f64).floor();
                (guess.max(0.0) as usize).min(cells - 1)
            }
            AxisKind::Explicit(p) => p.partition_point(|&v| v <= x).saturating_sub(1).min(cells - 1),
        };
        while j > 0 && self.line(j) > x {
            j -= 1;
        }
        while j + 1 < cells && self.line(j + 1) <= x {
            j += 1;
        }
        Some(j)
    }

    /// Moves interior lines lying within `tol` of any coordinate to
    /// `coordinate − 2·tol`, keeping the lines strictly increasing.
    fn guard_collisions(&mut self, coords: &[f64], tol: f64) {
        let cells = self.cells();
        for &x in coords {
            let Some(j) = self.locate(x) else { continue };
            for i in [j, j + 1] {
                if i == 0 || i >= cells {
                    continue;
                }
                if (self.line(i) - x).abs() <= tol {
                    let target = x - 2.0 * tol;
                    if target > self.line(i - 1) && target < self.line(i + 1) {
                        let current = self.line(i);
                        self.shifted.insert(i, current.min(target));
                    }
                }
            }
        }
    }
}

/// Where the function is evaluated inside each cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum TagRule {
    /// `ξⱼ = λⱼ₋₁`, `ζₖ = μₖ₋₁`.
    #[default]
    LowerLeft,
    Center,
    /// Explicit tags per λ-cell and per μ-cell.
    Custom { xi: Vec<f64>, zeta: Vec<f64> },
}

/// Grid partition of a rectangle with tag points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    lambda: GridAxis,
    mu: GridAxis,
    tags: TagRule,
}

impl GridPartition {
    pub fn new(lambda: GridAxis, mu: GridAxis, tags: TagRule) -> Result<Self> {
        if let TagRule::Custom { xi, zeta } = &tags {
            if xi.len() != lambda.cells() || zeta.len() != mu.cells() {
                return Err(Error::InvalidInput("one custom tag per cell is required on each axis".into()));
            }
            let in_cells = |axis: &GridAxis, tags: &[f64]| {
                tags.iter()
                    .enumerate()
                    .all(|(j, &t)| axis.line(j) <= t && t < axis.line(j + 1))
            };
            if !in_cells(&lambda, xi) || !in_cells(&mu, zeta) {
                return Err(Error::InvalidInput("custom tags must lie in their half-open cells".into()));
            }
        }
        Ok(Self { lambda, mu, tags })
    }

    /// Uniform `m × n` grid on `r`.
    pub fn uniform(r: &Rect, m: usize, n: usize, tags: TagRule) -> Result<Self> {
        r.validate()?;
        Self::new(GridAxis::uniform(r.a, r.b, m)?, GridAxis::uniform(r.c, r.d, n)?, tags)
    }

    /// Applies the eigenvalue-collision guard for `sm` to interior grid lines.
    pub fn guarded(mut self, sm: &SpectralMeasure) -> Self {
        let tol = sm.cluster_tol();
        let eigs = sm.eigenvalues();
        let re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
        let im: Vec<f64> = eigs.iter().map(|z| z.im).collect();
        self.lambda.guard_collisions(&re, tol);
        self.mu.guard_collisions(&im, tol);
        self
    }

    pub fn lambda_axis(&self) -> &GridAxis {
        &self.lambda
    }

    pub fn mu_axis(&self) -> &GridAxis {
        &self.mu
    }

    pub fn tags(&self) -> &TagRule {
        &self.tags
    }

    pub fn rect(&self) -> Rect {
        Rect {
            a: self.lambda.lo(),
            b: self.lambda.hi(),
            c: self.mu.lo(),
            d: self.mu.hi(),
        }
    }

    /// `max|δⱼ| + max|ωₖ|`.
    pub fn mesh(&self) -> f64 {
        self.lambda.max_width() + self.mu.max_width()
    }

    pub fn tag(&self, j: usize, k: usize) -> (f64, f64) {
        match &self.tags {
            TagRule::LowerLeft => (self.lambda.line(j), self.mu.line(k)),
            TagRule::Center => (
                0.5 * (self.lambda.line(j) + self.lambda.line(j + 1)),
                0.5 * (self.mu.line(k) + self.mu.line(k + 1)),
            ),
            TagRule::Custom { xi, zeta } => (xi[j], zeta[k]),
        }
    }

    /// Occupied cells in row-major order with the projection `E(cell)`.
    fn occupied_cells(&self, sm: &SpectralMeasure) -> Vec<((usize, usize), ComplexMatrix)> {
        let mut cells: BTreeMap<(usize, usize), ComplexMatrix> = BTreeMap::new();
        for atom in sm.atoms() {
            let z = atom.eigenvalue;
            if let (Some(j), Some(k)) = (self.lambda.locate(z.re), self.mu.locate(z.im)) {
                cells
                    .entry((j, k))
                    .and_modify(|p| *p += &atom.projection)
                    .or_insert_with(|| atom.projection.clone());
            }
        }
        cells.into_iter().collect()
    }
}

fn evaluate_tags(
    f: &OperatorFunction<'_>,
    p: &GridPartition,
    cells: &[((usize, usize), ComplexMatrix)],
) -> Result<Vec<ComplexMatrix>> {
    cells
        .par_iter()
        .map(|((j, k), _)| {
            let (xi, zeta) = p.tag(*j, *k);
            f.eval(xi, zeta)
        })
        .collect()
}

/// Right Stieltjes sum `Σⱼ Σₖ F(ξⱼ, ζₖ)·E(δⱼ × ωₖ)`.
///
/// Cells of zero measure are skipped; contributions are reduced in row-major
/// order (`j` outer, `k` inner) so the result does not depend on threading.
pub fn right_sum(f: &OperatorFunction<'_>, sm: &SpectralMeasure, p: &GridPartition) -> Result<ComplexMatrix> {
    if f.cols != sm.dim() {
        return Err(Error::shape("right sum", format!("{} columns", sm.dim()), format!("{} columns", f.cols)));
    }
    let cells = p.occupied_cells(sm);
    let values = evaluate_tags(f, p, &cells)?;
    let mut out = ComplexMatrix::zeros(f.rows, sm.dim());
    for ((_, proj), value) in cells.iter().zip(&values) {
        out += value * proj;
    }
    Ok(out)
}

/// Left Stieltjes sum `Σⱼ Σₖ E(δⱼ × ωₖ)·G(ξⱼ, ζₖ)`.
pub fn left_sum(g: &OperatorFunction<'_>, sm: &SpectralMeasure, p: &GridPartition) -> Result<ComplexMatrix> {
    if g.rows != sm.dim() {
        return Err(Error::shape("left sum", format!("{} rows", sm.dim()), format!("{} rows", g.rows)));
    }
    let cells = p.occupied_cells(sm);
    let values = evaluate_tags(g, p, &cells)?;
    let mut out = ComplexMatrix::zeros(sm.dim(), g.cols);
    for ((_, proj), value) in cells.iter().zip(&values) {
        out += proj * value;
    }
    Ok(out)
}

/// Exact right integral over `r` for an atomic measure: `Σ_{ζₖ ∈ r} F(Re ζₖ, Im ζₖ)·Pₖ`.
pub fn exact_right_integral(f: &OperatorFunction<'_>, sm: &SpectralMeasure, r: &Rect) -> Result<ComplexMatrix> {
    if f.cols != sm.dim() {
        return Err(Error::shape("right integral", format!("{} columns", sm.dim()), format!("{} columns", f.cols)));
    }
    sm.check_boundary(r)?;
    let mut out = ComplexMatrix::zeros(f.rows, sm.dim());
    for k in sm.atoms_in(r) {
        let atom = &sm.atoms()[k];
        out += f.eval_at(atom.eigenvalue)? * &atom.projection;
    }
    Ok(out)
}

/// Exact left integral `Σ_{ζₖ ∈ r} Pₖ·G(Re ζₖ, Im ζₖ)`.
pub fn exact_left_integral(g: &OperatorFunction<'_>, sm: &SpectralMeasure, r: &Rect) -> Result<ComplexMatrix> {
    if g.rows != sm.dim() {
        return Err(Error::shape("left integral", format!("{} rows", sm.dim()), format!("{} rows", g.rows)));
    }
    sm.check_boundary(r)?;
    let mut out = ComplexMatrix::zeros(sm.dim(), g.cols);
    for k in sm.atoms_in(r) {
        let atom = &sm.atoms()[k];
        out += &atom.projection * g.eval_at(atom.eigenvalue)?;
    }
    Ok(out)
}

/// One level of a dyadic refinement study.
#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub level: usize,
    pub m: usize,
    pub n: usize,
    pub mesh: f64,
    /// `‖J_level − J_{level−1}‖`; absent on level 0.
    pub diff_prev: Option<f64>,
    pub value: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelRecord>,
    pub final_mesh: f64,
    pub tol: f64,
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn value(&self) -> &ComplexMatrix {
        &self.levels.last().expect("report has at least one level").value
    }

    /// Cauchy differences of levels `1..`.
    pub fn diffs(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.diff_prev).collect()
    }
}

/// Tags used by the dyadic refinement.
///
/// Center tags are the default: lower-left tags stay put whenever an
/// eigenvalue's binary digit at that level is zero, which yields exact-zero
/// Cauchy differences and premature stops on measures with few atoms.
pub const REFINEMENT_TAGS: TagRule = TagRule::Center;

/// Dyadic refinement study: level `ℓ` is the uniform `2^ℓ × 2^ℓ` grid on `r`.
///
/// Runs until `‖J_ℓ − J_{ℓ−1}‖ ≤ tol` (operator norm) or `max_levels` is
/// reached; never fails on non-convergence, which is reported in the result.
pub fn refine_right(
    f: &OperatorFunction<'_>,
    sm: &SpectralMeasure,
    r: &Rect,
    tol: f64,
    max_levels: usize,
    tags: TagRule,
) -> Result<ConvergenceReport> {
    r.validate()?;
    if max_levels < 2 {
        return Err(Error::InvalidInput("refinement needs at least two levels".into()));
    }
    if matches!(tags, TagRule::Custom { .. }) {
        return Err(Error::InvalidInput("custom tags cannot be refined dyadically".into()));
    }
    // 2^60 cells keeps every grid line representable next to its neighbours.
    let max_levels = max_levels.min(60);
    let mut levels: Vec<LevelRecord> = Vec::with_capacity(max_levels + 1);
    let mut converged = false;
    for level in 0..=max_levels {
        let cells = 1usize << level;
        let p = GridPartition::uniform(r, cells, cells, tags.clone())?.guarded(sm);
        let value = right_sum(f, sm, &p)?;
        let diff_prev = levels.last().map(|prev| linalg::operator_norm(&(&value - &prev.value)));
        levels.push(LevelRecord {
            level,
            m: cells,
            n: cells,
            mesh: p.mesh(),
            diff_prev,
            value,
        });
        if diff_prev.is_some_and(|d| d <= tol) {
            converged = true;
            break;
        }
    }
    let final_mesh = levels.last().map(|l| l.mesh).unwrap_or(f64::NAN);
    Ok(ConvergenceReport {
        levels,
        final_mesh,
        tol,
        converged,
    })
}

/// Right integral over `r` by dyadic refinement with Cauchy-difference stopping.
pub fn integrate_right(
    f: &OperatorFunction<'_>,
    sm: &SpectralMeasure,
    r: &Rect,
    tol: f64,
    max_levels: usize,
) -> Result<(ComplexMatrix, ConvergenceReport)> {
    let report = refine_right(f, sm, r, tol, max_levels, REFINEMENT_TAGS)?;
    if !report.converged {
        return Err(Error::NoConvergence {
            levels: report.levels.len() - 1,
            last_diff: report.diffs().last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok((report.value().clone(), report))
}

fn sample_axis(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| lo + (hi - lo) * i as f64 / samples as f64).collect()
}

/// Sampled lower bounds `(γ₁, γ₂)` for the Lipschitz and mixed-difference
/// constants of `F` on `r`, from a `samples × samples` grid.
pub fn estimate_lipschitz(f: &OperatorFunction<'_>, r: &Rect, samples_per_axis: usize) -> Result<(f64, f64)> {
    r.validate()?;
    if samples_per_axis < 3 {
        return Err(Error::InvalidInput("at least three samples per axis are required".into()));
    }
    let ls = sample_axis(r.a, r.b, samples_per_axis);
    let ms = sample_axis(r.c, r.d, samples_per_axis);
    let s = samples_per_axis;
    let values: Vec<ComplexMatrix> = (0..s * s)
        .into_par_iter()
        .map(|idx| f.eval(ls[idx / s], ms[idx % s]))
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| &values[i * s + j];

    let pairs: Vec<(usize, usize)> = (0..s * s).flat_map(|p| (p + 1..s * s).map(move |q| (p, q))).collect();
    let gamma1 = pairs
        .par_iter()
        .map(|&(p, q)| {
            let (i1, j1, i2, j2) = (p / s, p % s, q / s, q % s);
            let dist = (ls[i1] - ls[i2]).abs() + (ms[j1] - ms[j2]).abs();
            linalg::operator_norm(&(at(i1, j1) - at(i2, j2))) / dist
        })
        .reduce(|| 0.0, f64::max);

    let axis_pairs: Vec<(usize, usize)> = (0..s).flat_map(|i| (i + 1..s).map(move |k| (i, k))).collect();
    let gamma2 = axis_pairs
        .par_iter()
        .flat_map_iter(|&(i, i2)| axis_pairs.iter().map(move |&(j, j2)| (i, i2, j, j2)))
        .map(|(i, i2, j, j2)| {
            let mixed = at(i, j) - at(i2, j) - at(i, j2) + at(i2, j2);
            linalg::operator_norm(&mixed) / ((ls[i2] - ls[i]) * (ms[j2] - ms[j]))
        })
        .reduce(|| 0.0, f64::max);
    Ok((gamma1, gamma2))
}

/// Sampled `sup ‖F‖` over `r`, including the eigenvalues of `sm` that lie in `r`.
pub fn sup_norm(f: &OperatorFunction<'_>, r: &Rect, samples_per_axis: usize, sm: Option<&SpectralMeasure>) -> Result<f64> {
    let ls = sample_axis(r.a, r.b, samples_per_axis.max(1));
    let ms = sample_axis(r.c, r.d, samples_per_axis.max(1));
    let mut points: Vec<(f64, f64)> = ls.iter().flat_map(|&l| ms.iter().map(move |&m| (l, m))).collect();
    if let Some(sm) = sm {
        points.extend(sm.atoms_in(r).into_iter().map(|k| {
            let z = sm.atoms()[k].eigenvalue;
            (z.re, z.im)
        }));
    }
    points
        .par_iter()
        .map(|&(l, m)| f.eval(l, m).map(|v| linalg::operator_norm(&v)))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Norm bound `4·sup‖F‖ + 2γ₁·((b−a)+(d−c)) + γ₂·(b−a)(d−c)` for the integral over `r`.
pub fn lnest_bound(sup_f: f64, gamma1: f64, gamma2: f64, r: &Rect) -> f64 {
    let (w, h) = (r.width(), r.height());
    4.0 * sup_f + 2.0 * gamma1 * (w + h) + gamma2 * w * h
}

/// `‖∫_r z·G(z) dE − C·∫_r G(z) dE‖` for left integrals, each computed as the
/// adjoint of the right integral of the pointwise adjoint.
pub fn czero_check(g: &OperatorFunction<'_>, sm: &SpectralMeasure, c: &ComplexMatrix, r: &Rect) -> Result<f64> {
    if c.shape() != (sm.dim(), sm.dim()) {
        return Err(Error::shape("commutation check", format!("{0}x{0}", sm.dim()), format!("{}x{}", c.nrows(), c.ncols())));
    }
    let zg = g.times_z();
    let with_z = exact_right_integral(&zg.adjoint_values(), sm, r)?.adjoint();
    let plain = exact_right_integral(&g.adjoint_values(), sm, r)?.adjoint();
    Ok(linalg::operator_norm(&(with_z - c * plain)))
}
