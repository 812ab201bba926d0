use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::SylvesterProblem;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

pub const DEFAULT_NODES: usize = 32;
pub const CAP_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

/// Union of positively oriented circles with winding number one around
/// `spec C` and zero around `spec A`.
#[derive(Debug, Clone, PartialEq)]
pub enum Contour {
    Single(Circle),
    PerAtom(Vec<Circle>),
}

impl Contour {
    pub fn circles(&self) -> &[Circle] {
        match self {
            Contour::Single(c) => std::slice::from_ref(c),
            Contour::PerAtom(cs) => cs,
        }
    }
}

/// One circle about the centroid of `spec C` with radius `max distance + gap/2`
/// when every eigenvalue of `A` stays at least `gap/4` outside it; otherwise
/// one circle per eigenvalue of `C` with radius `min(gap, nearest neighbour)/3`.
pub fn build_contour(eig_c: &[Complex64], eig_a: &[Complex64], gap: f64) -> Result<Contour> {
    if eig_c.is_empty() || !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::ContourConstructionFailed);
    }
    let center = eig_c.iter().sum::<Complex64>() / eig_c.len() as f64;
    let spread = eig_c.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let radius = spread + 0.5 * gap;
    if eig_a.iter().all(|l| (l - center).norm() >= radius + 0.25 * gap) {
        return Ok(Contour::Single(Circle { center, radius }));
    }
    let circles: Vec<Circle> = eig_c
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let nearest = eig_c
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| (z - w).norm())
                .fold(f64::INFINITY, f64::min);
            Circle {
                center: z,
                radius: gap.min(nearest) / 3.0,
            }
        })
        .collect();
    if circles.iter().any(|c| !(c.radius > 0.0)) {
        return Err(Error::ContourConstructionFailed);
    }
    Ok(Contour::PerAtom(circles))
}

/// Integrand weight at node `θ` of `circle`:
/// `R·e^{iθ}·(ζ − C)⁻¹·D·(A − ζ)⁻¹` with `ζ = c + R·e^{iθ}`.
fn node_term(prob: &SylvesterProblem, circle: &Circle, theta: f64) -> Result<ComplexMatrix> {
    let w = Complex64::from_polar(circle.radius, theta);
    let zeta = circle.center + w;
    let rel = prob.tolerances().tol_cluster;
    // (ζ − C)⁻¹·D = −(C − ζ)⁻¹·D
    let left = -linalg::solve_shifted(prob.c(), zeta, prob.d(), rel)?;
    Ok(linalg::right_divide_shifted(&left, prob.a(), zeta, rel)? * w)
}

fn node_sum(prob: &SylvesterProblem, contour: &Contour, thetas: &[f64]) -> Result<ComplexMatrix> {
    let jobs: Vec<(&Circle, f64)> = contour
        .circles()
        .iter()
        .flat_map(|c| thetas.iter().map(move |&t| (c, t)))
        .collect();
    let terms: Vec<ComplexMatrix> = jobs
        .par_iter()
        .map(|&(c, t)| node_term(prob, c, t))
        .collect::<Result<_>>()?;
    let mut sum = ComplexMatrix::zeros(prob.d().nrows(), prob.d().ncols());
    for t in &terms {
        sum += t;
    }
    Ok(sum)
}

/// Trapezoidal approximation of `(2πi)⁻¹ ∮ (ζ − C)⁻¹ D (A − ζ)⁻¹ dζ`.
///
/// Nodes per circle start at `n_nodes` and double, reusing earlier nodes,
/// until two successive values differ by at most `tol_quad·max(1, ‖X‖_F)`.
/// Returns the value and the final node count per circle.
pub fn contour_integral(
    prob: &SylvesterProblem,
    contour: &Contour,
    n_nodes: usize,
) -> Result<(ComplexMatrix, usize)> {
    let tol = prob.tolerances().tol_quad;
    let mut n = n_nodes.max(4);
    let thetas: Vec<f64> = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let mut sum = node_sum(prob, contour, &thetas)?;
    let mut value = &sum * Complex64::new(1.0 / n as f64, 0.0);
    let mut last_change = f64::INFINITY;
    while 2 * n <= CAP_NODES {
        let fresh: Vec<f64> = (0..n).map(|j| PI * (2 * j + 1) as f64 / n as f64).collect();
        sum += node_sum(prob, contour, &fresh)?;
        n *= 2;
        let next = &sum * Complex64::new(1.0 / n as f64, 0.0);
        last_change = (&next - &value).norm();
        value = next;
        if last_change <= tol * value.norm().max(1.0) {
            return Ok((value, n));
        }
    }
    Err(Error::QuadratureNoConvergence { nodes: n, last_change })
}
