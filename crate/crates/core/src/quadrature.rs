//! Gauss rules on the reference edge `[0, 1]` and the reference triangle
//! `{x̂, ŷ ≥ 0, x̂ + ŷ ≤ 1}`.
//!
//! Triangle rules are tensor Gauss–Legendre rules pulled back through the
//! collapsed (Duffy) map `(u, v) ↦ (u, v(1 − u))`, which has Jacobian `1 − u`.

use alloc::vec::Vec;

use crate::{Error, Result};

pub const MIN_TRIANGLE_DEGREE: usize = 1;
pub const MAX_TRIANGLE_DEGREE: usize = 20;

/// Degree for products of basis polynomials.
pub const DEGREE_POLY: usize = 8;
/// Degree for integrands involving a smooth exact solution.
pub const DEGREE_SMOOTH: usize = 14;
/// Degree for integrands on triangles touching a singular point.
pub const DEGREE_SINGULAR: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

pub type TriangleRule = QuadRule<2>;
pub type EdgeRule = QuadRule<1>;

impl<const D: usize> QuadRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; D], f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre(n, x);
                dp = d;
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    // ascending order
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule on `[0, 1]` exact for polynomials of degree `degree`.
pub fn edge_rule(degree: usize) -> EdgeRule {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    EdgeRule {
        points: x.iter().map(|&t| [0.5 * (t + 1.0)]).collect(),
        weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        exact_degree: 2 * n - 1,
    }
}

/// Collapsed Gauss rule on the reference triangle exact to `degree`.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    if !(MIN_TRIANGLE_DEGREE..=MAX_TRIANGLE_DEGREE).contains(&degree) {
        return Err(Error::UnsupportedDegree { degree, min: MIN_TRIANGLE_DEGREE, max: MAX_TRIANGLE_DEGREE });
    }
    // the Jacobian 1 − u raises the degree in u by one
    let n = (degree + 3) / 2;
    let line = edge_rule(2 * n - 1);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (pu, wu) in line.iter() {
        let u = pu[0];
        for (pv, wv) in line.iter() {
            points.push([u, pv[0] * (1.0 - u)]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    Ok(TriangleRule { points, weights, exact_degree: degree })
}
