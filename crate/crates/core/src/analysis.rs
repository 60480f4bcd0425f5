//! Error norms, the piecewise-linear L² projection, the mesh-dependent
//! H² seminorm and the local P5 postprocessing.
//!
//! Displacements are stored per triangle as coefficients of the barycentric
//! functions, `u_h|_K = Σ_r u[3t + r] λ_r`.
//!
//! The seminorm is
//!
//! ```text
//! |v|²_{2,h} = Σ_K |v|²_{2,K} + Σ_e ( h_e⁻³ ‖[v]‖²_e + h_e⁻¹ ‖[∇v]‖²_e )
//! ```
//!
//! with `h_e` the edge length and the jump replaced by the trace on boundary
//! edges.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{displacement_mass, QuadratureOptions, Rules};
use crate::basis::LocalBasis;
use crate::dofmap::SigmaDofMap;
use crate::mesh::{Element, Mesh, Point};
use crate::poly::{frobenius, mono_exponents, n_monomials, Poly, SymPoly};
use crate::problems::Manufactured;
use crate::quadrature::{edge_rule, EdgeRule};
use crate::{dense, Error, Result};

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Derivs2 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl core::ops::Sub for Derivs2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let h = |i: usize, j: usize| self.hess[i][j] - o.hess[i][j];
        Self {
            value: self.value - o.value,
            grad: [self.grad[0] - o.grad[0], self.grad[1] - o.grad[1]],
            hess: [[h(0, 0), h(0, 1)], [h(1, 0), h(1, 1)]],
        }
    }
}

impl core::ops::Mul<f64> for Derivs2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            value: s * self.value,
            grad: [s * self.grad[0], s * self.grad[1]],
            hess: [[s * self.hess[0][0], s * self.hess[0][1]], [s * self.hess[1][0], s * self.hess[1][1]]],
        }
    }
}

/// The six norms of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorBundle {
    pub level: usize,
    pub h: f64,
    /// `‖σ − σ_h‖₀`
    pub e_sigma_l2: f64,
    /// `‖−f − div div σ_h‖₀`
    pub e_divdiv_l2: f64,
    /// `‖u − u_h‖₀`
    pub e_u_l2: f64,
    /// `‖Q_h u − u_h‖₀`
    pub e_qu_l2: f64,
    /// `|Q_h u − u_h|_{2,h}`
    pub snorm_qu: f64,
    /// `|u − u_h*|_{2,h}`
    pub snorm_post: f64,
}

impl ErrorBundle {
    pub fn values(&self) -> [f64; 6] {
        [self.e_sigma_l2, self.e_divdiv_l2, self.e_u_l2, self.e_qu_l2, self.snorm_qu, self.snorm_post]
    }
}

pub const NORM_NAMES: [&str; 6] = ["err_sigma", "err_divdiv", "err_u", "err_Qu", "snorm_Qu", "snorm_post"];

/// `log2(e_l / e_{l+1})` for consecutive entries; `None` for the first level.
pub fn rates(values: &[f64]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        out.push(if i == 0 { None } else { Some(libm::log2(values[i - 1] / v)) });
    }
    out
}

/// Gradients of `λ_0, λ_1, λ_2`.
pub fn barycentric_gradients(el: &Element) -> [[f64; 2]; 3] {
    let b = el.jacobian_matrix();
    let j = el.jacobian();
    let g1 = [b[1][1] / j, -b[0][1] / j];
    let g2 = [-b[1][0] / j, b[0][0] / j];
    [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]
}

/// A piecewise-linear function on one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalP1 {
    el: Element,
    coeffs: [f64; 3],
    grads: [[f64; 2]; 3],
}

impl LocalP1 {
    pub fn new(el: &Element, coeffs: [f64; 3]) -> Self {
        Self { el: *el, coeffs, grads: barycentric_gradients(el) }
    }

    pub fn coeffs(&self) -> [f64; 3] {
        self.coeffs
    }

    pub fn eval(&self, x: Point) -> f64 {
        let l = self.el.barycentric(x);
        (0..3).map(|r| self.coeffs[r] * l[r]).sum()
    }

    pub fn derivs(&self, x: Point) -> Derivs2 {
        let mut g = [0.0; 2];
        for r in 0..3 {
            g[0] += self.coeffs[r] * self.grads[r][0];
            g[1] += self.coeffs[r] * self.grads[r][1];
        }
        Derivs2 { value: self.eval(x), grad: g, hess: [[0.0; 2]; 2] }
    }
}

fn local_coeffs(u: &[f64], t: usize) -> [f64; 3] {
    [u[3 * t], u[3 * t + 1], u[3 * t + 2]]
}

/// Inverse of the barycentric mass matrix applied to the moments `b_r = ∫ g λ_r`.
fn solve_p1_moments(area: f64, b: [f64; 3]) -> [f64; 3] {
    let s = b[0] + b[1] + b[2];
    let k = 3.0 / area;
    [k * (4.0 * b[0] - s), k * (4.0 * b[1] - s), k * (4.0 * b[2] - s)]
}

/// L² projection of `g` onto P1 on one triangle.
pub fn project_element(el: &Element, g: &dyn Fn(f64, f64) -> Result<f64>, rules: &Rules) -> Result<[f64; 3]> {
    let jac = el.jacobian();
    let mut b = [0.0; 3];
    for (p, w) in rules.data_rule(el).iter() {
        let x = el.to_physical(*p);
        let v = g(x[0], x[1])?;
        let lam = [1.0 - p[0] - p[1], p[0], p[1]];
        for r in 0..3 {
            b[r] += w * jac * v * lam[r];
        }
    }
    Ok(solve_p1_moments(el.area(), b))
}

/// `Q_h g`: elementwise L² projection onto discontinuous P1.
pub fn project_qh(mesh: &Mesh, g: &dyn Fn(f64, f64) -> Result<f64>, options: QuadratureOptions) -> Result<Vec<f64>> {
    let rules = Rules::new(options)?;
    let mut out = Vec::with_capacity(3 * mesh.n_triangles());
    for el in mesh.elements() {
        out.extend_from_slice(&project_element(&el, g, &rules)?);
    }
    Ok(out)
}

/// A P5 function on one triangle, stored in `s = (x − c)/h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalP5 {
    center: Point,
    h: f64,
    p: Poly,
    px: Poly,
    py: Poly,
    pxx: Poly,
    pxy: Poly,
    pyy: Poly,
}

pub const P5_DIM: usize = n_monomials(5);

impl LocalP5 {
    pub fn from_scaled(center: Point, h: f64, p: Poly) -> Self {
        let (px, py) = (p.dx(), p.dy());
        let (pxx, pxy, pyy) = (px.dx(), px.dy(), py.dy());
        Self { center, h, p, px, py, pxx, pxy, pyy }
    }

    /// Coefficients of the scaled monomials `s_x^i s_y^j`.
    pub fn scaled_coeffs(&self) -> &[f64] {
        self.p.coeffs()
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.h
    }

    pub fn derivs(&self, x: Point) -> Derivs2 {
        let s = [(x[0] - self.center[0]) / self.h, (x[1] - self.center[1]) / self.h];
        let (h1, h2) = (1.0 / self.h, 1.0 / (self.h * self.h));
        let xy = h2 * self.pxy.eval(s[0], s[1]);
        Derivs2 {
            value: self.p.eval(s[0], s[1]),
            grad: [h1 * self.px.eval(s[0], s[1]), h1 * self.py.eval(s[0], s[1])],
            hess: [[h2 * self.pxx.eval(s[0], s[1]), xy], [xy, h2 * self.pyy.eval(s[0], s[1])]],
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        self.p.eval((x[0] - self.center[0]) / self.h, (x[1] - self.center[1]) / self.h)
    }
}

/// Solves `(∇²u*, ∇²q)_K = −(σ_h, ∇²q)_K` for `q` in the monomials of degree
/// 2..5 together with `(u*, q)_K = (u_h, q)_K` for `q ∈ P1`.
///
/// `sigma` is a polynomial in `x − sigma_center`.
pub fn postprocess_element(
    el: &Element,
    sigma: &SymPoly,
    sigma_center: Point,
    u_h: &LocalP1,
    rules: &Rules,
) -> Result<LocalP5> {
    let c = el.centroid();
    let h = el.diameter();
    let jac = el.jacobian();
    let area = el.area();
    // Hessians of the scaled monomials, in s, and the monomials themselves
    let monos: Vec<Poly> = (0..P5_DIM)
        .map(|k| {
            let (i, j) = mono_exponents(k);
            Poly::monomial(i, j)
        })
        .collect();
    let hess: Vec<[Poly; 3]> = monos.iter().map(|m| [m.dx().dx(), m.dx().dy(), m.dy().dy()]).collect();
    let n_p1 = n_monomials(1);

    let mut a = DMatrix::<f64>::zeros(P5_DIM, P5_DIM);
    let mut rhs = DVector::<f64>::zeros(P5_DIM);
    let mut hv = [[[0.0; 2]; 2]; P5_DIM];
    let mut mv = [0.0; P5_DIM];
    for (p, w) in rules.poly.iter() {
        let x = el.to_physical(*p);
        let s = [(x[0] - c[0]) / h, (x[1] - c[1]) / h];
        for k in 0..P5_DIM {
            let [xx, xy, yy] = &hess[k];
            let xy = xy.eval(s[0], s[1]);
            hv[k] = [[xx.eval(s[0], s[1]), xy], [xy, yy.eval(s[0], s[1])]];
            mv[k] = monos[k].eval(s[0], s[1]);
        }
        let wk = w * jac / area;
        let sig = sigma.eval(x[0] - sigma_center[0], x[1] - sigma_center[1]);
        let uh = u_h.eval(x);
        // rows 0..3: P1 moments; rows 3..21: Hessian orthogonality, scaled by h⁴
        for r in 0..P5_DIM {
            if r < n_p1 {
                for k in 0..P5_DIM {
                    a[(r, k)] += wk * mv[r] * mv[k];
                }
                rhs[r] += wk * uh * mv[r];
            } else {
                for k in n_p1..P5_DIM {
                    a[(r, k)] += wk * frobenius(&hv[r], &hv[k]);
                }
                rhs[r] -= wk * h * h * frobenius(&sig, &hv[r]);
            }
        }
    }
    let coeffs = dense::solve(a, &rhs).ok_or(Error::SingularLocal { element: el.id, what: "postprocessing system" })?;
    Ok(LocalP5::from_scaled(c, h, Poly::from_coeffs(5, coeffs.iter().copied().collect())))
}

/// Elementwise postprocessing of a discrete solution.
pub fn postprocess(
    mesh: &Mesh,
    map: &SigmaDofMap,
    sigma: &[f64],
    u: &[f64],
    options: QuadratureOptions,
) -> Result<Vec<LocalP5>> {
    let rules = Rules::new(options)?;
    mesh.elements()
        .map(|el| {
            let basis = LocalBasis::new(&el)?;
            let s = basis.combine(&map.gather(el.id, sigma));
            postprocess_element(&el, &s, basis.center(), &LocalP1::new(&el, local_coeffs(u, el.id)), &rules)
        })
        .collect()
}

fn hess_sq(h: &[[f64; 2]; 2]) -> f64 {
    frobenius(h, h)
}

fn jump_terms(d: &Derivs2, h_e: f64) -> f64 {
    d.value * d.value / (h_e * h_e * h_e) + (d.grad[0] * d.grad[0] + d.grad[1] * d.grad[1]) / h_e
}

/// `Σ_K |v|²_{2,K}` contribution of one triangle.
pub fn seminorm_volume_term(el: &Element, v: &dyn Fn(Point) -> Result<Derivs2>, rules: &Rules) -> Result<f64> {
    let jac = el.jacobian();
    let mut acc = 0.0;
    for (p, w) in rules.data_rule(el).iter() {
        acc += w * jac * hess_sq(&v(el.to_physical(*p))?.hess);
    }
    Ok(acc)
}

/// Edge rule used for jump terms; edges ending at the singular point get the
/// singular degree.
pub fn seminorm_edge_rule(mesh: &Mesh, e: usize, options: &QuadratureOptions) -> EdgeRule {
    let ed = &mesh.edges()[e];
    let hits = options.singular_point.is_some_and(|p| {
        ed.vertices.iter().any(|&v| {
            let x = mesh.vertices()[v];
            (x[0] - p[0]).abs() < 1e-12 && (x[1] - p[1]).abs() < 1e-12
        })
    });
    edge_rule(if hits { options.singular_degree } else { options.smooth_degree })
}

/// Jump contribution of edge `e` for a field given per triangle by `v(t, x)`.
pub fn seminorm_edge_term(
    mesh: &Mesh,
    e: usize,
    v: &dyn Fn(usize, Point) -> Result<Derivs2>,
    rule: &EdgeRule,
) -> Result<f64> {
    let ed = &mesh.edges()[e];
    let a = mesh.vertices()[ed.vertices[0]];
    let b = mesh.vertices()[ed.vertices[1]];
    let len = ed.length;
    let mut acc = 0.0;
    for (s, w) in rule.iter() {
        let x = [a[0] + s[0] * (b[0] - a[0]), a[1] + s[0] * (b[1] - a[1])];
        let d = match ed.triangles {
            [Some(t1), Some(t2)] => v(t1, x)? - v(t2, x)?,
            [Some(t), None] | [None, Some(t)] => v(t, x)?,
            [None, None] => return Err(Error::InvalidArgument(alloc::format!("edge {e} has no triangle"))),
        };
        acc += w * len * jump_terms(&d, len);
    }
    Ok(acc)
}

/// `|v|_{2,h}` of a piecewise-smooth field given per triangle by `v(t, x)`.
pub fn seminorm_2h(
    mesh: &Mesh,
    v: &dyn Fn(usize, Point) -> Result<Derivs2>,
    options: QuadratureOptions,
) -> Result<f64> {
    let rules = Rules::new(options)?;
    let mut acc = 0.0;
    for el in mesh.elements() {
        acc += seminorm_volume_term(&el, &|x| v(el.id, x), &rules)?;
    }
    for e in 0..mesh.n_edges() {
        acc += seminorm_edge_term(mesh, e, v, &seminorm_edge_rule(mesh, e, &options))?;
    }
    Ok(libm::sqrt(acc))
}

/// Per-triangle reconstructed fields needed by the error norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementFields {
    pub sigma_h: SymPoly,
    pub sigma_center: Point,
    pub u_h: LocalP1,
    pub qu: LocalP1,
    pub post: LocalP5,
}

pub fn element_fields(
    mesh: &Mesh,
    map: &SigmaDofMap,
    t: usize,
    sigma: &[f64],
    u: &[f64],
    problem: &dyn Manufactured,
    rules: &Rules,
) -> Result<ElementFields> {
    let el = mesh.element(t);
    let basis = LocalBasis::new(&el)?;
    let sigma_h = basis.combine(&map.gather(t, sigma));
    let u_h = LocalP1::new(&el, local_coeffs(u, t));
    let qu = LocalP1::new(&el, project_element(&el, &|x, y| problem.u(x, y), rules)?);
    let post = postprocess_element(&el, &sigma_h, basis.center(), &u_h, rules)?;
    Ok(ElementFields { sigma_h, sigma_center: basis.center(), u_h, qu, post })
}

/// Squared volume contributions of one triangle, in the order of
/// [`ErrorBundle::values`]; the last two hold only the broken-Hessian part.
pub fn element_contributions(
    el: &Element,
    f: &ElementFields,
    problem: &dyn Manufactured,
    rules: &Rules,
) -> Result<[f64; 6]> {
    let jac = el.jacobian();
    let dd = f.sigma_h.divdiv();
    let sc = f.sigma_center;
    let mut acc = [0.0; 6];
    for (p, w) in rules.data_rule(el).iter() {
        let x = el.to_physical(*p);
        let wj = w * jac;
        let jet = problem.jet(x[0], x[1])?;
        let hess = jet.hessian();
        let sh = f.sigma_h.eval(x[0] - sc[0], x[1] - sc[1]);
        let mut ds = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                ds[i][j] = -hess[i][j] - sh[i][j];
            }
        }
        acc[0] += wj * frobenius(&ds, &ds);
        let r = -jet.bilaplacian() - dd.eval(x[0] - sc[0], x[1] - sc[1]);
        acc[1] += wj * r * r;
        let eu = jet.value() - f.u_h.eval(x);
        acc[2] += wj * eu * eu;
        let hp = f.post.derivs(x).hess;
        let mut dp = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dp[i][j] = hess[i][j] - hp[i][j];
            }
        }
        acc[5] += wj * frobenius(&dp, &dp);
    }
    // Q_h u − u_h is linear: exact through the local mass matrix
    let m = displacement_mass(el.area());
    let d: [f64; 3] = core::array::from_fn(|r| f.qu.coeffs()[r] - f.u_h.coeffs()[r]);
    for r in 0..3 {
        for s in 0..3 {
            acc[3] += d[r] * m[r][s] * d[s];
        }
    }
    Ok(acc)
}

/// Squared edge contributions `(snorm_Qu², snorm_post²)` of edge `e`.
pub fn edge_contributions(
    mesh: &Mesh,
    e: usize,
    fields: &[ElementFields],
    problem: &dyn Manufactured,
    options: &QuadratureOptions,
) -> Result<[f64; 2]> {
    let rule = seminorm_edge_rule(mesh, e, options);
    let qu = seminorm_edge_term(mesh, e, &|t, x| Ok(fields[t].qu.derivs(x) - fields[t].u_h.derivs(x)), &rule)?;
    let post = seminorm_edge_term(
        mesh,
        e,
        &|t, x| {
            let j = problem.jet(x[0], x[1])?;
            let exact = Derivs2 { value: j.value(), grad: j.gradient(), hess: j.hessian() };
            Ok(exact - fields[t].post.derivs(x))
        },
        &rule,
    )?;
    Ok([qu, post])
}

/// Sums squared contributions in the order given and takes square roots.
pub fn reduce(level: usize, h: f64, elements: &[[f64; 6]], edges: &[[f64; 2]]) -> ErrorBundle {
    let mut s = [0.0; 6];
    for c in elements {
        for k in 0..6 {
            s[k] += c[k];
        }
    }
    for c in edges {
        s[4] += c[0];
        s[5] += c[1];
    }
    ErrorBundle {
        level,
        h,
        e_sigma_l2: libm::sqrt(s[0]),
        e_divdiv_l2: libm::sqrt(s[1]),
        e_u_l2: libm::sqrt(s[2]),
        e_qu_l2: libm::sqrt(s[3]),
        snorm_qu: libm::sqrt(s[4]),
        snorm_post: libm::sqrt(s[5]),
    }
}

/// All six norms of a discrete solution, computed sequentially.
pub fn error_norms(
    mesh: &Mesh,
    map: &SigmaDofMap,
    sigma: &[f64],
    u: &[f64],
    problem: &dyn Manufactured,
    options: QuadratureOptions,
) -> Result<ErrorBundle> {
    let rules = Rules::new(options)?;
    let fields = (0..mesh.n_triangles())
        .map(|t| element_fields(mesh, map, t, sigma, u, problem, &rules))
        .collect::<Result<Vec<_>>>()?;
    let el_terms = mesh
        .elements()
        .map(|el| element_contributions(&el, &fields[el.id], problem, &rules))
        .collect::<Result<Vec<_>>>()?;
    let edge_terms = (0..mesh.n_edges())
        .map(|e| edge_contributions(mesh, e, &fields, problem, &options))
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(mesh.level(), mesh.h_max(), &el_terms, &edge_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> QuadratureOptions {
        QuadratureOptions::default()
    }

    #[test]
    fn projection_reproduces_linears() {
        let m = Mesh::unit_square(2).unwrap();
        let g = |x: f64, y: f64| Ok(1.5 - 2.0 * x + 0.25 * y);
        let q = project_qh(&m, &g, opts()).unwrap();
        for el in m.elements() {
            for (r, v) in el.coords.iter().enumerate() {
                assert!((q[3 * el.id + r] - g(v[0], v[1]).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn projection_residual_is_orthogonal() {
        let el = Element::standalone([[0.1, 0.2], [0.9, 0.3], [0.4, 1.1]]);
        let rules = Rules::new(opts()).unwrap();
        let c = project_element(&el, &|x, _| Ok(x * x), &rules).unwrap();
        let p = LocalP1::new(&el, c);
        let jac = el.jacobian();
        for r in 0..3 {
            let mut acc = 0.0;
            for (q, w) in rules.smooth.iter() {
                let x = el.to_physical(*q);
                let lam = [1.0 - q[0] - q[1], q[0], q[1]];
                acc += w * jac * (x[0] * x[0] - p.eval(x)) * lam[r];
            }
            assert!(acc.abs() < 1e-12, "{acc}");
        }
        // idempotence
        let c2 = project_element(&el, &|x, y| Ok(p.eval([x, y])), &rules).unwrap();
        for r in 0..3 {
            assert!((c[r] - c2[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn seminorm_of_global_linear_is_boundary_trace() {
        let m = Mesh::unit_square(2).unwrap();
        let v = |_t: usize, x: Point| Ok(Derivs2 { value: 1.0 + x[0], grad: [1.0, 0.0], hess: [[0.0; 2]; 2] });
        let s = seminorm_2h(&m, &v, opts()).unwrap();
        // each boundary edge has length 1/2: h⁻³ ∫ v² + h⁻¹ ∫ |∇v|²
        let mut expect = 0.0;
        for ed in m.edges().iter().filter(|e| e.is_boundary()) {
            let a = m.vertices()[ed.vertices[0]];
            let b = m.vertices()[ed.vertices[1]];
            let h = ed.length;
            // ∫ (1 + x)² ds along a straight segment by Simpson
            let f = |s: f64| {
                let x = a[0] + s * (b[0] - a[0]);
                (1.0 + x) * (1.0 + x)
            };
            let int = h * (f(0.0) + 4.0 * f(0.5) + f(1.0)) / 6.0;
            expect += int / (h * h * h) + h / h;
        }
        assert!((s * s - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn postprocessing_reproduces_quintics() {
        let el = Element::standalone([[0.2, 0.1], [0.7, 0.25], [0.35, 0.8]]);
        let rules = Rules::new(opts()).unwrap();
        let c = [0.3, 0.5];
        let mut p = Poly::zero(5);
        for k in 0..P5_DIM {
            let (i, j) = mono_exponents(k);
            let v = libm::sin(1.0 + k as f64);
            p.add_scaled(&Poly::monomial(i, j), v);
        }
        let sigma = SymPoly { xx: -&p.dx().dx(), xy: -&p.dx().dy(), yy: -&p.dy().dy() };
        let qp = project_element(&el, &|x, y| Ok(p.eval(x - c[0], y - c[1])), &rules).unwrap();
        let post = postprocess_element(&el, &sigma, c, &LocalP1::new(&el, qp), &rules).unwrap();
        for (q, _) in rules.poly.iter() {
            let x = el.to_physical(*q);
            assert!((post.eval(x) - p.eval(x[0] - c[0], x[1] - c[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn postprocessing_keeps_affine_data() {
        let el = Element::standalone([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let rules = Rules::new(opts()).unwrap();
        let uh = LocalP1::new(&el, [0.5, -1.0, 2.0]);
        let post = postprocess_element(&el, &SymPoly::zero(3), [0.0, 0.0], &uh, &rules).unwrap();
        for (q, _) in rules.poly.iter() {
            let x = el.to_physical(*q);
            assert!((post.eval(x) - uh.eval(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn rates_of_halving() {
        let r = rates(&[1.0, 0.25, 1.0 / 16.0]);
        assert_eq!(r[0], None);
        assert!((r[1].unwrap() - 2.0).abs() < 1e-15 && (r[2].unwrap() - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn seminorm_is_homogeneous(c in -5.0f64..5.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let m = Mesh::unit_square(1).unwrap();
            let v = move |t: usize, x: Point| Ok(Derivs2 {
                value: a * x[0] * x[1] + t as f64 * b,
                grad: [a * x[1], a * x[0]],
                hess: [[0.0, a], [a, 0.0]],
            });
            let s1 = seminorm_2h(&m, &v, opts()).unwrap();
            let s2 = seminorm_2h(&m, &|t, x| Ok(v(t, x)? * c), opts()).unwrap();
            prop_assert!((s2 - c.abs() * s1).abs() <= 1e-12 * (1.0 + s2));
        }
    }
}
