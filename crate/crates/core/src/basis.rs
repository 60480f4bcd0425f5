//! The 30-function local stress basis of the cubic H(div div; S) element.
//!
//! The local functionals on a triangle `K` (the *catalog*) are, with outward
//! unit normals `n` and edge weights `μ_a`, `μ_b` (the edge barycentric
//! coordinates of the endpoints ordered by global vertex id):
//!
//! | local index     | functional                                       |
//! |-----------------|--------------------------------------------------|
//! | `3i + c`        | component `c ∈ {11, 12, 22}` of `σ(x_i)`           |
//! | `9 + 4l + k`    | `∫_{e_l} σn · (μ e_d)`, `(μ, d)` = `(a,1) (a,2) (b,1) (b,2)` |
//! | `21 + 3l + k`   | `∫_{e_l} div σ · n  q`, `q` = `μ_a, μ_b, μ_a μ_b`   |
//!
//! [`LocalBasis::new`] builds the basis by the bubble-plus-outer route:
//! reference H(div; S) bubbles are combined into duals of the edge
//! `div σ · n` moments, pushed forward by the Piola map
//! `τ = J⁻¹ B τ̂ Bᵀ`, and completed by vertex and edge Lagrange tensors whose
//! `div σ · n` moments are subtracted. The result is finally made dual to the
//! catalog. [`LocalBasis::vandermonde`] is an independent route through a
//! monomial basis of `P3(K; S)`.
//!
//! Polynomials of a basis are written in `ξ = x − c` with `c` the centroid.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::dense;
use crate::mesh::{Element, Point};
use crate::poly::{frobenius, Poly, SymPoly};
use crate::quadrature::{edge_rule, triangle_rule, EdgeRule};
use crate::{Error, Result};

pub const N_LOCAL: usize = 30;
pub const N_VERTEX_DOFS: usize = 9;
pub const N_FLUX_DOFS: usize = 12;
pub const N_DIV_FLUX_DOFS: usize = 9;
pub const FIRST_FLUX: usize = 9;
pub const FIRST_DIV_FLUX: usize = 21;

/// Largest tolerated deviation of the catalog Gram matrix from the identity.
pub const GRAM_TOL: f64 = 1e-10;

/// What a local functional measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    VertexValue {
        vertex: usize,
        component: usize,
    },
    /// Normal flux moment; `weight` 0 is `μ_a`, 1 is `μ_b`.
    Flux {
        edge: usize,
        weight: usize,
        direction: usize,
    },
    /// `div σ · n` moment; `weight` 0, 1, 2 is `μ_a`, `μ_b`, `μ_a μ_b`.
    DivFlux {
        edge: usize,
        weight: usize,
    },
}

pub fn functional(i: usize) -> Functional {
    match i {
        0..=8 => Functional::VertexValue { vertex: i / 3, component: i % 3 },
        9..=20 => {
            let k = (i - FIRST_FLUX) % 4;
            Functional::Flux { edge: (i - FIRST_FLUX) / 4, weight: k / 2, direction: k % 2 }
        }
        21..=29 => Functional::DivFlux { edge: (i - FIRST_DIV_FLUX) / 3, weight: (i - FIRST_DIV_FLUX) % 3 },
        _ => panic!("local functional index {i} out of range"),
    }
}

/// Barycentric coordinates of `el` as polynomials in `x − origin`.
pub fn barycentric(el: &Element, origin: Point) -> [Poly; 3] {
    let b = el.jacobian_matrix();
    let j = el.jacobian();
    let d = [origin[0] - el.coords[0][0], origin[1] - el.coords[0][1]];
    // x̂ = B⁻¹ (ξ + origin − x1)
    let inv = [[b[1][1] / j, -b[0][1] / j], [-b[1][0] / j, b[0][0] / j]];
    let l2 = Poly::linear(inv[0][0] * d[0] + inv[0][1] * d[1], inv[0][0], inv[0][1]);
    let l3 = Poly::linear(inv[1][0] * d[0] + inv[1][1] * d[1], inv[1][0], inv[1][1]);
    let l1 = &(&Poly::constant(1.0) - &l2) - &l3;
    [l1, l2, l3]
}

fn outer(u: Point, v: Point) -> [[f64; 2]; 2] {
    [[u[0] * v[0], u[0] * v[1]], [u[1] * v[0], u[1] * v[1]]]
}

fn sym_outer(u: Point, v: Point) -> [[f64; 2]; 2] {
    let m = outer(u, v);
    [[m[0][0], 0.5 * (m[0][1] + m[1][0])], [0.5 * (m[0][1] + m[1][0]), m[1][1]]]
}

pub fn reference_element() -> Element {
    Element::standalone([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
}

/// The nine H(div; S) bubbles on the reference triangle, in reference
/// coordinates. For each edge `i` the pair
/// `(9/2) λ_{i+1} λ_{i+2} (3λ_{i+1} − 1) t_i t_iᵀ`,
/// `(9/2) λ_{i+2} λ_{i+1} (3λ_{i+2} − 1) t_i t_iᵀ` comes first, then
/// `27 λ_1 λ_2 λ_3 t_i t_iᵀ` for each edge, where `t_i = x_{i+2} − x_{i+1}`
/// is not normalised.
pub fn reference_bubbles() -> Vec<SymPoly> {
    let el = reference_element();
    let lam = barycentric(&el, [0.0, 0.0]);
    let x = el.coords;
    let tt = |i: usize| {
        let t = [x[(i + 2) % 3][0] - x[(i + 1) % 3][0], x[(i + 2) % 3][1] - x[(i + 1) % 3][1]];
        outer(t, t)
    };
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        let (p, q) = ((i + 1) % 3, (i + 2) % 3);
        let pq = &lam[p] * &lam[q];
        let a = &pq * &(&lam[p].scale(3.0) - &Poly::constant(1.0));
        let b = &pq * &(&lam[q].scale(3.0) - &Poly::constant(1.0));
        out.push(SymPoly::scalar_times(&a.scale(4.5), tt(i)));
        out.push(SymPoly::scalar_times(&b.scale(4.5), tt(i)));
    }
    let cubic = &(&lam[0] * &lam[1]) * &lam[2];
    for i in 0..3 {
        out.push(SymPoly::scalar_times(&cubic.scale(27.0), tt(i)));
    }
    out
}

/// Row `i` holds the bubble coefficients of the reference function dual to
/// the `i`-th edge `div σ · n` moment (edge-major; weights `λ_{l+1}`,
/// `λ_{l+2}`, `λ_{l+1} λ_{l+2}`).
pub const DUAL_COEFFICIENTS: [[f64; 9]; 9] = [
    [0.0, 0.0, -4.0 / 9.0, -2.0 / 9.0, -2.0 / 3.0, -4.0 / 3.0, -1.0 / 3.0, 2.0 / 9.0, 0.0],
    [0.0, 0.0, -4.0 / 3.0, -2.0 / 3.0, -2.0 / 9.0, -4.0 / 9.0, -1.0 / 3.0, 0.0, 2.0 / 9.0],
    [0.0, 0.0, 40.0 / 9.0, 20.0 / 9.0, 20.0 / 9.0, 40.0 / 9.0, 20.0 / 9.0, -10.0 / 9.0, -10.0 / 9.0],
    [-2.0 / 3.0, -4.0 / 3.0, 0.0, 0.0, -4.0 / 9.0, -2.0 / 9.0, 0.0, -1.0 / 3.0, 2.0 / 9.0],
    [-2.0 / 9.0, -4.0 / 9.0, 0.0, 0.0, -4.0 / 3.0, -2.0 / 3.0, 2.0 / 9.0, -1.0 / 3.0, 0.0],
    [20.0 / 9.0, 40.0 / 9.0, 0.0, 0.0, 40.0 / 9.0, 20.0 / 9.0, -10.0 / 9.0, 20.0 / 9.0, -10.0 / 9.0],
    [-4.0 / 9.0, -2.0 / 9.0, -2.0 / 3.0, -4.0 / 3.0, 0.0, 0.0, 2.0 / 9.0, 0.0, -1.0 / 3.0],
    [-4.0 / 3.0, -2.0 / 3.0, -2.0 / 9.0, -4.0 / 9.0, 0.0, 0.0, 0.0, 2.0 / 9.0, -1.0 / 3.0],
    [40.0 / 9.0, 20.0 / 9.0, 20.0 / 9.0, 40.0 / 9.0, 0.0, 0.0, -10.0 / 9.0, -10.0 / 9.0, 20.0 / 9.0],
];

/// Combines the reference bubbles with a 9×9 coefficient matrix.
pub fn combine_bubbles(coefficients: &[[f64; 9]; 9]) -> Vec<SymPoly> {
    let bubbles = reference_bubbles();
    coefficients
        .iter()
        .map(|row| {
            let mut f = SymPoly::zero(3);
            for (c, b) in row.iter().zip(&bubbles) {
                f.add_scaled(b, *c);
            }
            f
        })
        .collect()
}

/// Reference functions dual to the reference edge `div σ · n` moments.
pub fn reference_duals() -> Vec<SymPoly> {
    combine_bubbles(&DUAL_COEFFICIENTS)
}

/// Pushes a reference field forward to `el`: `τ(x) = J⁻¹ B τ̂(x̂) Bᵀ`, as a
/// polynomial in `x − origin`.
pub fn piola(el: &Element, origin: Point, reference: &SymPoly) -> SymPoly {
    let b = el.jacobian_matrix();
    let j = el.jacobian();
    let inv = [[b[1][1] / j, -b[0][1] / j], [-b[1][0] / j, b[0][0] / j]];
    let d = [origin[0] - el.coords[0][0], origin[1] - el.coords[0][1]];
    let shift = [inv[0][0] * d[0] + inv[0][1] * d[1], inv[1][0] * d[0] + inv[1][1] * d[1]];
    reference.compose_affine(inv, shift).congruence(b).scale(1.0 / j)
}

struct EdgeSampler {
    rule: EdgeRule,
}

impl EdgeSampler {
    fn new() -> Self {
        Self { rule: edge_rule(8) }
    }

    /// Calls `visit(x − origin, s, weight·|e|)` along edge `l`, where `s`
    /// runs from vertex `l+1` (s = 0) to vertex `l+2` (s = 1).
    fn for_each(&self, el: &Element, origin: Point, l: usize, mut visit: impl FnMut(Point, f64, f64)) {
        let [p, q] = el.edge_local(l);
        let (xp, xq) = (el.coords[p], el.coords[q]);
        let len = el.edge_length(l);
        for (s, w) in self.rule.iter() {
            let s = s[0];
            let x = [xp[0] + s * (xq[0] - xp[0]) - origin[0], xp[1] + s * (xq[1] - xp[1]) - origin[1]];
            visit(x, s, w * len);
        }
    }
}

/// Edge `div σ · n` moments in edge-major order with weights `λ_{l+1}`,
/// `λ_{l+2}`, `λ_{l+1} λ_{l+2}` and outward normals.
pub fn div_flux_moments(el: &Element, origin: Point, f: &SymPoly) -> [f64; 9] {
    let sampler = EdgeSampler::new();
    let div = f.div();
    let mut out = [0.0; 9];
    for l in 0..3 {
        let n = el.outward_normal(l);
        sampler.for_each(el, origin, l, |x, s, w| {
            let d = div.eval(x[0], x[1]);
            let dn = d[0] * n[0] + d[1] * n[1];
            out[3 * l] += w * dn * (1.0 - s);
            out[3 * l + 1] += w * dn * s;
            out[3 * l + 2] += w * dn * (1.0 - s) * s;
        });
    }
    out
}

/// Applies the 30 catalog functionals of `el` to a field in `x − origin`.
pub fn apply_catalog(el: &Element, origin: Point, f: &SymPoly) -> [f64; N_LOCAL] {
    let mut out = [0.0; N_LOCAL];
    for i in 0..3 {
        let x = el.coords[i];
        let v = f.eval(x[0] - origin[0], x[1] - origin[1]);
        out[3 * i] = v[0][0];
        out[3 * i + 1] = v[0][1];
        out[3 * i + 2] = v[1][1];
    }
    let sampler = EdgeSampler::new();
    let div = f.div();
    for l in 0..3 {
        let n = el.outward_normal(l);
        let [a, _] = el.edge_endpoints(l);
        let a_first = a == el.edge_local(l)[0];
        sampler.for_each(el, origin, l, |x, s, w| {
            let (mu_a, mu_b) = if a_first { (1.0 - s, s) } else { (s, 1.0 - s) };
            let v = f.eval(x[0], x[1]);
            let sn = [v[0][0] * n[0] + v[0][1] * n[1], v[1][0] * n[0] + v[1][1] * n[1]];
            let base = FIRST_FLUX + 4 * l;
            out[base] += w * sn[0] * mu_a;
            out[base + 1] += w * sn[1] * mu_a;
            out[base + 2] += w * sn[0] * mu_b;
            out[base + 3] += w * sn[1] * mu_b;
            let d = div.eval(x[0], x[1]);
            let dn = d[0] * n[0] + d[1] * n[1];
            let base = FIRST_DIV_FLUX + 3 * l;
            out[base] += w * dn * mu_a;
            out[base + 1] += w * dn * mu_b;
            out[base + 2] += w * dn * mu_a * mu_b;
        });
    }
    out
}

const T: [[[f64; 2]; 2]; 3] = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]];

/// The 21 vertex and edge Lagrange tensors: `φ_i T_c` for vertices, then per
/// edge and per edge node `φ_{e,j} n nᵀ` and `½ φ_{e,j} (t nᵀ + n tᵀ)`.
pub fn outer_functions(el: &Element, origin: Point) -> Vec<SymPoly> {
    let lam = barycentric(el, origin);
    let one = Poly::constant(1.0);
    let mut out = Vec::with_capacity(21);
    for l in &lam {
        let phi = &(&(l * &(&l.scale(3.0) - &one)) * &(&l.scale(3.0) - &one.scale(2.0))) * 0.5;
        for t in &T {
            out.push(SymPoly::scalar_times(&phi, *t));
        }
    }
    for l in 0..3 {
        let n = el.outward_normal(l);
        let t = el.traversal_tangent(l);
        let [p, q] = el.edge_local(l);
        let pq = &lam[p] * &lam[q];
        let nodes = [&(&pq * &(&lam[p].scale(3.0) - &one)) * 4.5, &(&pq * &(&lam[q].scale(3.0) - &one)) * 4.5];
        for phi in &nodes {
            out.push(SymPoly::scalar_times(phi, outer(n, n)));
            out.push(SymPoly::scalar_times(phi, sym_outer(t, n)));
        }
    }
    out
}

/// The 30 functions of the bubble-plus-outer construction, before the final
/// dualisation: nine Piola-mapped edge duals followed by the 21 outer
/// functions with their edge `div σ · n` moments removed.
pub fn construction_functions(el: &Element, origin: Point) -> Vec<SymPoly> {
    let duals: Vec<SymPoly> = reference_duals().iter().map(|r| piola(el, origin, r)).collect();
    let mut out = duals.clone();
    for phi in outer_functions(el, origin) {
        let beta = div_flux_moments(el, origin, &phi);
        let mut tau = phi;
        for (b, d) in beta.iter().zip(&duals) {
            tau.add_scaled(d, -b);
        }
        out.push(tau);
    }
    out
}

fn check_shape(el: &Element) -> Result<()> {
    let j = el.jacobian();
    let d = el.diameter();
    if !(j > 1e-12 * d * d) || !j.is_finite() {
        return Err(Error::Degenerate { element: el.id, jacobian: j });
    }
    Ok(())
}

/// A basis of `P3(K; S)` dual to the catalog of one triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    center: Point,
    functions: Vec<SymPoly>,
}

impl LocalBasis {
    pub fn new(el: &Element) -> Result<Self> {
        check_shape(el)?;
        let center = el.centroid();
        let raw = construction_functions(el, center);
        let basis = Self::dualize(el, center, raw)?;
        basis.check_gram(el)?;
        Ok(basis)
    }

    /// Dual basis obtained by inverting the catalog applied to scaled
    /// monomials `((x − c)/h)^i ((y − c)/h)^j T`.
    pub fn vandermonde(el: &Element) -> Result<Self> {
        check_shape(el)?;
        let center = el.centroid();
        let h = el.diameter();
        let mut raw = Vec::with_capacity(N_LOCAL);
        for t in &T {
            for d in 0..=3usize {
                for j in 0..=d {
                    let m = Poly::monomial(d - j, j).scale(libm::pow(h, -(d as f64)));
                    raw.push(SymPoly::scalar_times(&m, *t));
                }
            }
        }
        Self::dualize(el, center, raw)
    }

    fn dualize(el: &Element, center: Point, raw: Vec<SymPoly>) -> Result<Self> {
        let mut g = DMatrix::zeros(N_LOCAL, N_LOCAL);
        for (c, f) in raw.iter().enumerate() {
            let col = apply_catalog(el, center, f);
            for r in 0..N_LOCAL {
                g[(r, c)] = col[r];
            }
        }
        let x = dense::try_inverse(g).ok_or(Error::SingularLocal { element: el.id, what: "catalog Gram matrix" })?;
        let functions = (0..N_LOCAL)
            .map(|k| {
                let mut f = SymPoly::zero(3);
                for (j, r) in raw.iter().enumerate() {
                    let c = x[(j, k)];
                    if c != 0.0 {
                        f.add_scaled(r, c);
                    }
                }
                f
            })
            .collect();
        Ok(Self { center, functions })
    }

    /// `G[i][j]`: catalog functional `i` applied to basis function `j`.
    pub fn gram(&self, el: &Element) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(N_LOCAL, N_LOCAL);
        for (c, f) in self.functions.iter().enumerate() {
            let col = apply_catalog(el, self.center, f);
            for r in 0..N_LOCAL {
                g[(r, c)] = col[r];
            }
        }
        g
    }

    pub fn check_gram(&self, el: &Element) -> Result<()> {
        let g = self.gram(el);
        let mut worst = (0, 0, 0.0f64);
        for r in 0..N_LOCAL {
            for c in 0..N_LOCAL {
                let dev = (g[(r, c)] - if r == c { 1.0 } else { 0.0 }).abs();
                if dev > worst.2 {
                    worst = (r, c, dev);
                }
            }
        }
        if worst.2 > GRAM_TOL || !worst.2.is_finite() {
            return Err(Error::GramDeviation { element: el.id, row: worst.0, col: worst.1, deviation: worst.2 });
        }
        Ok(())
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn functions(&self) -> &[SymPoly] {
        &self.functions
    }

    pub fn eval(&self, i: usize, x: Point) -> [[f64; 2]; 2] {
        self.functions[i].eval(x[0] - self.center[0], x[1] - self.center[1])
    }

    /// `Σ_i c_i τ_i` as one polynomial field in `x − center`.
    pub fn combine(&self, coefficients: &[f64]) -> SymPoly {
        let mut f = SymPoly::zero(3);
        for (c, tau) in coefficients.iter().zip(&self.functions) {
            if *c != 0.0 {
                f.add_scaled(tau, *c);
            }
        }
        f
    }

    /// Element mass matrix `∫_K τ_i : τ_j`.
    pub fn mass_matrix(&self, el: &Element) -> DMatrix<f64> {
        let rule = triangle_rule(crate::quadrature::DEGREE_POLY).expect("supported degree");
        let mut m = DMatrix::zeros(N_LOCAL, N_LOCAL);
        let jac = el.jacobian().abs();
        let mut vals = [[[0.0; 2]; 2]; N_LOCAL];
        for (p, w) in rule.iter() {
            let x = el.to_physical(*p);
            for (i, v) in vals.iter_mut().enumerate() {
                *v = self.eval(i, x);
            }
            for i in 0..N_LOCAL {
                for j in i..N_LOCAL {
                    m[(i, j)] += w * jac * frobenius(&vals[i], &vals[j]);
                }
            }
        }
        for i in 0..N_LOCAL {
            for j in 0..i {
                m[(i, j)] = m[(j, i)];
            }
        }
        m
    }
}
