//! Projection-valued spectral measure of a normal matrix.
//!
//! A normal `C` has finitely many distinct eigenvalues `ζₖ` with mutually
//! orthogonal eigenprojections `Pₖ`; the measure of a set is the sum of the
//! `Pₖ` whose eigenvalue it contains. Sets are half-open rectangles
//! `[a,b)×[c,d)` in the `(Re, Im)` plane.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::tolerances::Tolerances;

/// Half-open rectangle `[a,b)×[c,d)`; the first interval is on the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Rect {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Rect {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let r = Self { a, b, c, d };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.d].iter().all(|v| v.is_finite());
        if !finite || !(self.a < self.b) || !(self.c < self.d) {
            return Err(Error::InvalidInput(format!(
                "rectangle [{}, {})x[{}, {}) must be finite with a < b and c < d",
                self.a, self.b, self.c, self.d
            )));
        }
        Ok(())
    }

    /// Smallest rectangle containing every point, padded by `margin` on all sides.
    pub fn enclosing(points: &[Complex64], margin: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("no points to enclose".into()));
        }
        let margin = margin.max(f64::EPSILON);
        let (mut a, mut b, mut c, mut d) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in points {
            a = a.min(z.re);
            b = b.max(z.re);
            c = c.min(z.im);
            d = d.max(z.im);
        }
        Self::new(a - margin, b + margin, c - margin, d + margin)
    }

    #[inline]
    pub fn contains(&self, z: Complex64) -> bool {
        self.a <= z.re && z.re < self.b && self.c <= z.im && z.im < self.d
    }

    /// Distance from `z` to the nearest of the four boundary lines, measured
    /// along the axes (so points outside the rectangle are handled too).
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let dx = (z.re - self.a).abs().min((z.re - self.b).abs());
        let dy = (z.im - self.c).abs().min((z.im - self.d).abs());
        let in_x = self.a <= z.re && z.re <= self.b;
        let in_y = self.c <= z.im && z.im <= self.d;
        match (in_x, in_y) {
            (true, true) => dx.min(dy),
            (true, false) => dy,
            (false, true) => dx,
            (false, false) => dx.max(dy),
        }
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            a: self.a.max(other.a),
            b: self.b.min(other.b),
            c: self.c.max(other.c),
            d: self.d.min(other.d),
        };
        (r.a < r.b && r.c < r.d).then_some(r)
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn height(&self) -> f64 {
        self.d - self.c
    }
}

/// One distinct eigenvalue with its orthogonal eigenprojection.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub eigenvalue: Complex64,
    pub projection: ComplexMatrix,
    pub multiplicity: usize,
}

/// Result of evaluating the measure on a rectangle.
#[derive(Debug, Clone)]
pub struct RectMeasure {
    pub projection: ComplexMatrix,
    /// Atoms within the clustering tolerance of the rectangle boundary. Their
    /// membership was decided by the exact half-open comparison.
    pub boundary_atoms: Vec<usize>,
}

impl RectMeasure {
    pub fn is_fragile(&self) -> bool {
        !self.boundary_atoms.is_empty()
    }
}

/// Verification residuals for the algebraic properties of a measure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasureResiduals {
    pub hermitian: f64,
    pub idempotent: f64,
    pub orthogonality: f64,
    pub completeness: f64,
    pub reconstruction: f64,
}

impl MeasureResiduals {
    pub fn max(&self) -> f64 {
        [
            self.hermitian,
            self.idempotent,
            self.orthogonality,
            self.completeness,
            self.reconstruction,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Spectral measure `{E(Ω)}` of a normal matrix, realized by its atoms.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    tolerances: Tolerances,
    radius: f64,
}

/// Decomposes a normal matrix into its spectral measure.
pub fn decompose_normal(c: &ComplexMatrix, tol: &Tolerances) -> Result<SpectralMeasure> {
    SpectralMeasure::from_normal(c, tol)
}

impl SpectralMeasure {
    pub fn from_normal(c: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        linalg::validate(c, "C")?;
        linalg::require_square(c, "spectral decomposition")?;
        let defect = linalg::normality_defect(c);
        let threshold = tol.tol_normal * linalg::operator_norm(c).powi(2);
        if defect > threshold {
            return Err(Error::NotNormal { defect, threshold });
        }

        let n = c.nrows();
        let (q, eigs) = linalg::eig_normal(c)?;
        let radius = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let cluster_tol = tol.tol_cluster * radius.max(1.0);

        let mut atoms: Vec<Atom> = cluster(&eigs, cluster_tol)
            .into_iter()
            .map(|members| {
                let mean = members.iter().map(|&i| eigs[i]).sum::<Complex64>() / members.len() as f64;
                let block = ComplexMatrix::from_fn(n, members.len(), |r, k| q[(r, members[k])]);
                let basis = block.qr().q();
                Atom {
                    eigenvalue: mean,
                    projection: &basis * basis.adjoint(),
                    multiplicity: members.len(),
                }
            })
            .collect();
        atoms.sort_by(|x, y| {
            x.eigenvalue
                .re
                .total_cmp(&y.eigenvalue.re)
                .then(x.eigenvalue.im.total_cmp(&y.eigenvalue.im))
        });

        Ok(Self {
            dim: n,
            atoms,
            tolerances: *tol,
            radius,
        })
    }

    /// Builds a measure directly from atoms; used by tests and for measures
    /// known in closed form. Projections are taken as given.
    pub fn from_atoms(dim: usize, atoms: Vec<Atom>, tol: &Tolerances) -> Result<Self> {
        tol.validate()?;
        for atom in &atoms {
            if atom.projection.shape() != (dim, dim) {
                return Err(Error::shape(
                    "spectral atom",
                    format!("{dim}x{dim}"),
                    format!("{}x{}", atom.projection.nrows(), atom.projection.ncols()),
                ));
            }
        }
        let radius = atoms.iter().map(|a| a.eigenvalue.norm()).fold(0.0, f64::max);
        Ok(Self {
            dim,
            atoms,
            tolerances: *tol,
            radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.atoms.iter().map(|a| a.eigenvalue).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.atoms.iter().map(|a| a.multiplicity).collect()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn spectral_radius(&self) -> f64 {
        self.radius
    }

    /// Absolute proximity threshold `tol_cluster·max(1, ρ)`.
    pub fn cluster_tol(&self) -> f64 {
        self.tolerances.tol_cluster * self.radius.max(1.0)
    }

    /// Indices of atoms whose eigenvalue lies in `r`.
    pub fn atoms_in(&self, r: &Rect) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&k| r.contains(self.atoms[k].eigenvalue))
            .collect()
    }

    /// Indices of atoms within the clustering tolerance of `∂r`.
    pub fn boundary_atoms(&self, r: &Rect) -> Vec<usize> {
        let tol = self.cluster_tol();
        (0..self.atoms.len())
            .filter(|&k| r.boundary_distance(self.atoms[k].eigenvalue) <= tol)
            .collect()
    }

    /// Fails with [`Error::BoundaryEigenvalue`] when any atom sits on `∂r`.
    pub fn check_boundary(&self, r: &Rect) -> Result<()> {
        match self.boundary_atoms(r).first() {
            Some(&k) => Err(Error::BoundaryEigenvalue {
                eigenvalue: self.atoms[k].eigenvalue,
                tol: self.cluster_tol(),
            }),
            None => Ok(()),
        }
    }

    fn sum_projections(&self, indices: impl IntoIterator<Item = usize>) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in indices {
            out += &self.atoms[k].projection;
        }
        out
    }

    /// `E(r)` with boundary-proximity flags.
    pub fn measure_of_rect(&self, r: &Rect) -> RectMeasure {
        RectMeasure {
            projection: self.sum_projections(self.atoms_in(r)),
            boundary_atoms: self.boundary_atoms(r),
        }
    }

    /// `E` of a finite union of pairwise disjoint rectangles.
    pub fn measure_of_union(&self, rects: &[Rect]) -> ComplexMatrix {
        self.sum_projections(
            (0..self.atoms.len()).filter(|&k| rects.iter().any(|r| r.contains(self.atoms[k].eigenvalue))),
        )
    }

    /// Spectral function `Ê(λ, μ) = E({x < λ, y < μ})`; infinite arguments allowed.
    pub fn spectral_function(&self, lambda: f64, mu: f64) -> ComplexMatrix {
        self.sum_projections(
            (0..self.atoms.len())
                .filter(|&k| self.atoms[k].eigenvalue.re < lambda && self.atoms[k].eigenvalue.im < mu),
        )
    }

    /// Functional calculus `f(C) = Σₖ f(ζₖ)·Pₖ`.
    pub fn apply_function(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            out += &atom.projection * f(atom.eigenvalue);
        }
        out
    }

    /// Residuals of the projection algebra, plus reconstruction of `source`.
    pub fn residuals(&self, source: &ComplexMatrix) -> MeasureResiduals {
        let mut hermitian: f64 = 0.0;
        let mut idempotent: f64 = 0.0;
        let mut orthogonality: f64 = 0.0;
        for (j, atom) in self.atoms.iter().enumerate() {
            let p = &atom.projection;
            hermitian = hermitian.max(linalg::operator_norm(&(p.adjoint() - p)));
            idempotent = idempotent.max(linalg::operator_norm(&(p * p - p)));
            for other in &self.atoms[j + 1..] {
                orthogonality = orthogonality.max(linalg::operator_norm(&(p * &other.projection)));
            }
        }
        let completeness = linalg::operator_norm(
            &(self.sum_projections(0..self.atoms.len()) - linalg::identity(self.dim)),
        );
        let reconstruction = linalg::operator_norm(&(self.apply_function(|z| z) - source));
        MeasureResiduals {
            hermitian,
            idempotent,
            orthogonality,
            completeness,
            reconstruction,
        }
    }
}

/// Single-linkage clustering of points whose pairwise distance is at most `tol`.
/// Returns index groups, each sorted ascending.
fn cluster(points: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}
