//! The vectorial H¹ element of degree four and numerical checks of the
//! discrete sequence
//!
//! ```text
//! RT  ⊂  V_h  --sym curl-->  Σ_h  --div div-->  P_h  → 0.
//! ```
//!
//! Local degrees of freedom of `v ∈ P4(K; R²)`, 30 in total:
//!
//! * `6i + k`, `k = 0, 1`: the value `v_k` at vertex `i`;
//!   `k = 2..6`: `∂_x v_0, ∂_y v_0, ∂_x v_1, ∂_y v_1` at vertex `i`;
//! * `18 + 4l + k`, `k = 0, 1`: `∫_e v_k ds` on edge `l`;
//!   `k = 2, 3`: `∫_e div v μ ds` with `μ = μ_a, μ_b`, the edge barycentrics
//!   of the endpoints in increasing global id.
//!
//! None of these depend on an edge orientation, so the global map carries no
//! signs: vertex `v` ↦ `6v + k`, edge `e` ↦ `6#V + 4e + k`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::assembly::{assemble, QuadratureOptions};
use crate::basis::{apply_catalog, N_LOCAL};
use crate::dofmap::SigmaDofMap;
use crate::mesh::{Element, Mesh, Point};
use crate::poly::{Poly, VecPoly};
use crate::quadrature::edge_rule;
use crate::{dense, Error, Result};

pub const VH_LOCAL: usize = 30;
pub const VH_DEGREE: usize = 4;
/// Relative threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// Absolute tolerance for cross-element agreement of stress functionals.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Applies the 30 local functionals to `v`, a field in `x − origin`.
pub fn apply_vh_catalog(el: &Element, origin: Point, v: &VecPoly) -> [f64; VH_LOCAL] {
    let mut out = [0.0; VH_LOCAL];
    let grads = [v.0[0].dx(), v.0[0].dy(), v.0[1].dx(), v.0[1].dy()];
    for i in 0..3 {
        let x = [el.coords[i][0] - origin[0], el.coords[i][1] - origin[1]];
        let val = v.eval(x[0], x[1]);
        out[6 * i] = val[0];
        out[6 * i + 1] = val[1];
        for (k, g) in grads.iter().enumerate() {
            out[6 * i + 2 + k] = g.eval(x[0], x[1]);
        }
    }
    let rule = edge_rule(8);
    let div = v.div();
    for l in 0..3 {
        let [a, b] = el.edge_endpoints(l);
        let (xa, xb) = (el.coords[a], el.coords[b]);
        let len = el.edge_length(l);
        let base = 18 + 4 * l;
        for (s, w) in rule.iter() {
            let s = s[0];
            let x = [xa[0] + s * (xb[0] - xa[0]) - origin[0], xa[1] + s * (xb[1] - xa[1]) - origin[1]];
            let wl = w * len;
            let val = v.eval(x[0], x[1]);
            out[base] += wl * val[0];
            out[base + 1] += wl * val[1];
            let d = div.eval(x[0], x[1]);
            out[base + 2] += wl * d * (1.0 - s);
            out[base + 3] += wl * d * s;
        }
    }
    out
}

/// Basis of `P4(K; R²)` dual to the local functionals, from the scaled
/// monomials `((x − c)/h)^i ((y − c)/h)^j e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VhLocalBasis {
    center: Point,
    functions: Vec<VecPoly>,
}

impl VhLocalBasis {
    pub fn new(el: &Element) -> Result<Self> {
        let center = el.centroid();
        let h = el.diameter();
        let mut raw = Vec::with_capacity(VH_LOCAL);
        for k in 0..2 {
            for d in 0..=VH_DEGREE {
                for j in 0..=d {
                    let m = Poly::monomial(d - j, j).scale(libm::pow(h, -(d as f64)));
                    let mut v = VecPoly::zero(VH_DEGREE);
                    v.0[k] = m;
                    raw.push(v);
                }
            }
        }
        let mut g = DMatrix::zeros(VH_LOCAL, VH_LOCAL);
        for (c, f) in raw.iter().enumerate() {
            for (r, v) in apply_vh_catalog(el, center, f).iter().enumerate() {
                g[(r, c)] = *v;
            }
        }
        let x = dense::try_inverse(g).ok_or(Error::SingularLocal { element: el.id, what: "V_h Vandermonde matrix" })?;
        let functions = (0..VH_LOCAL)
            .map(|k| {
                let mut f = VecPoly::zero(VH_DEGREE);
                for (j, r) in raw.iter().enumerate() {
                    f.add_scaled(r, x[(j, k)]);
                }
                f
            })
            .collect();
        Ok(Self { center, functions })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn functions(&self) -> &[VecPoly] {
        &self.functions
    }

    /// `G[i][j]`: functional `i` applied to basis function `j`.
    pub fn gram(&self, el: &Element) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(VH_LOCAL, VH_LOCAL);
        for (c, f) in self.functions.iter().enumerate() {
            for (r, v) in apply_vh_catalog(el, self.center, f).iter().enumerate() {
                g[(r, c)] = *v;
            }
        }
        g
    }

    pub fn combine(&self, coefficients: &[f64]) -> VecPoly {
        let mut f = VecPoly::zero(VH_DEGREE);
        for (c, v) in coefficients.iter().zip(&self.functions) {
            if *c != 0.0 {
                f.add_scaled(v, *c);
            }
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VhDofMap {
    n_dofs: usize,
    global: Vec<[usize; VH_LOCAL]>,
}

impl VhDofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let nv = mesh.n_vertices();
        let global = mesh
            .elements()
            .map(|el| {
                let mut g = [0usize; VH_LOCAL];
                for i in 0..3 {
                    for k in 0..6 {
                        g[6 * i + k] = 6 * el.vertex_ids[i] + k;
                    }
                }
                for l in 0..3 {
                    for k in 0..4 {
                        g[18 + 4 * l + k] = 6 * nv + 4 * el.edge_ids[l] + k;
                    }
                }
                g
            })
            .collect();
        Self { n_dofs: 6 * nv + 4 * mesh.n_edges(), global }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn global(&self, t: usize) -> &[usize; VH_LOCAL] {
        &self.global[t]
    }
}

/// Global coefficients of the V_h interpolant of a polynomial field given in
/// absolute coordinates.
pub fn interpolate_vh(mesh: &Mesh, map: &VhDofMap, v: &VecPoly) -> Vec<f64> {
    let mut out = vec![0.0; map.n_dofs()];
    for el in mesh.elements() {
        let local = apply_vh_catalog(&el, [0.0, 0.0], v);
        for (k, g) in map.global(el.id).iter().enumerate() {
            out[*g] = local[k];
        }
    }
    out
}

/// Writes element values into a global vector, checking agreement with what
/// neighbouring elements already wrote.
struct Gather {
    values: Vec<f64>,
    seen: Vec<bool>,
}

impl Gather {
    fn new(n: usize) -> Self {
        Self { values: vec![0.0; n], seen: vec![false; n] }
    }

    fn put(&mut self, dof: usize, v: f64) -> Result<()> {
        if self.seen[dof] {
            let mismatch = (self.values[dof] - v).abs();
            if !(mismatch <= CONSISTENCY_TOL) {
                return Err(Error::Inconsistent { dof, mismatch });
            }
        } else {
            self.values[dof] = v;
            self.seen[dof] = true;
        }
        Ok(())
    }
}

fn put_sigma(gather: &mut Gather, smap: &SigmaDofMap, el: &Element, origin: Point, v: &VecPoly) -> Result<()> {
    let local = apply_catalog(el, origin, &v.sym_curl());
    let (g, s) = (smap.global(el.id), smap.signs(el.id));
    for i in 0..N_LOCAL {
        gather.put(g[i], s[i] * local[i])?;
    }
    Ok(())
}

/// Stress coefficients of `sym curl v_h`, with every stress functional
/// evaluated on each adjacent element and required to agree.
pub fn sym_curl_to_sigma(mesh: &Mesh, vmap: &VhDofMap, smap: &SigmaDofMap, coeffs: &[f64]) -> Result<Vec<f64>> {
    let mut gather = Gather::new(smap.n_dofs());
    for el in mesh.elements() {
        let basis = VhLocalBasis::new(&el)?;
        let local: Vec<f64> = vmap.global(el.id).iter().map(|&g| coeffs[g]).collect();
        put_sigma(&mut gather, smap, &el, basis.center(), &basis.combine(&local))?;
    }
    Ok(gather.values)
}

/// The matrix of `sym curl: V_h → Σ_h` in the two global bases.
pub fn sym_curl_matrix(mesh: &Mesh, vmap: &VhDofMap, smap: &SigmaDofMap) -> Result<DMatrix<f64>> {
    let mut cols: Vec<Gather> = (0..vmap.n_dofs()).map(|_| Gather::new(smap.n_dofs())).collect();
    for el in mesh.elements() {
        let basis = VhLocalBasis::new(&el)?;
        for (k, &g) in vmap.global(el.id).iter().enumerate() {
            put_sigma(&mut cols[g], smap, &el, basis.center(), &basis.functions()[k])?;
        }
    }
    let mut m = DMatrix::zeros(smap.n_dofs(), vmap.n_dofs());
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.values.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    Ok(m)
}

/// Largest violation along edge `l` of
///
/// ```text
/// nᵀσn = nᵀ∂_t v,   tᵀσn = tᵀ∂_t v − ½ div v,   div σ · n = ½ ∂_t div v
/// ```
///
/// for `σ = sym curl v`, `t` the traversal tangent and `n = rot90(t)`.
/// `v` is given in `x − origin`.
pub fn edge_identity_residual(el: &Element, origin: Point, l: usize, v: &VecPoly) -> f64 {
    let sigma = v.sym_curl();
    let dsig = sigma.div();
    let div = v.div();
    let (divx, divy) = (div.dx(), div.dy());
    let j = [[v.0[0].dx(), v.0[0].dy()], [v.0[1].dx(), v.0[1].dy()]];
    let t = el.traversal_tangent(l);
    let n = [-t[1], t[0]];
    let [p, q] = el.edge_local(l);
    let (xp, xq) = (el.coords[p], el.coords[q]);
    let mut worst = 0.0f64;
    for (s, _) in edge_rule(8).iter() {
        let x = [xp[0] + s[0] * (xq[0] - xp[0]) - origin[0], xp[1] + s[0] * (xq[1] - xp[1]) - origin[1]];
        let sg = sigma.eval(x[0], x[1]);
        let sn = [sg[0][0] * n[0] + sg[0][1] * n[1], sg[1][0] * n[0] + sg[1][1] * n[1]];
        let dtv: [f64; 2] = core::array::from_fn(|i| j[i][0].eval(x[0], x[1]) * t[0] + j[i][1].eval(x[0], x[1]) * t[1]);
        let dv = div.eval(x[0], x[1]);
        let dtdiv = divx.eval(x[0], x[1]) * t[0] + divy.eval(x[0], x[1]) * t[1];
        let ds = dsig.eval(x[0], x[1]);
        let r1 = (n[0] * sn[0] + n[1] * sn[1]) - (n[0] * dtv[0] + n[1] * dtv[1]);
        let r2 = (t[0] * sn[0] + t[1] * sn[1]) - (t[0] * dtv[0] + t[1] * dtv[1] - 0.5 * dv);
        let r3 = (ds[0] * n[0] + ds[1] * n[1]) - 0.5 * dtdiv;
        worst = worst.max(r1.abs()).max(r2.abs()).max(r3.abs());
    }
    worst
}

/// Numerical rank, nullity and composition data of the discrete sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexReport {
    pub n_sigma: usize,
    pub n_u: usize,
    pub n_vh: usize,
    pub rank_b: usize,
    pub nullity_b: usize,
    /// `6#V + 4#E − 3`
    pub expected_nullity: usize,
    pub rank_sym_curl: usize,
    /// `max |B · S|` over the sym curl matrix `S`.
    pub max_b_sym_curl: f64,
    /// `max |B σ|` for `σ = sym curl v_h` with random `v_h`.
    pub max_b_random: f64,
    /// Largest stress coefficient of the image of the lowest-order RT fields.
    pub max_rt_image: f64,
}

impl ComplexReport {
    pub fn holds(&self) -> bool {
        self.rank_b == self.n_u
            && self.nullity_b == self.expected_nullity
            && self.rank_sym_curl == self.expected_nullity
            && self.n_sigma == self.expected_nullity + self.n_u
            && self.max_b_sym_curl < CONSISTENCY_TOL
            && self.max_b_random < CONSISTENCY_TOL
            && self.max_rt_image < CONSISTENCY_TOL
    }
}

/// Largest problem size for the dense rank computations.
pub const COMPLEX_MAX_DOFS: usize = 2000;

pub fn check_complex(mesh: &Mesh, seed: u64) -> Result<ComplexReport> {
    let smap = SigmaDofMap::new(mesh);
    if smap.n_dofs() > COMPLEX_MAX_DOFS {
        return Err(Error::InvalidArgument(alloc::format!(
            "dense rank checks limited to {COMPLEX_MAX_DOFS} stress unknowns, got {}",
            smap.n_dofs()
        )));
    }
    let vmap = VhDofMap::new(mesh);
    let sys = assemble(mesh, &smap, None, QuadratureOptions::default())?;
    let mut b = DMatrix::zeros(sys.n_u(), sys.n_sigma());
    for (r, c, v) in sys.b.triplets() {
        b[(r, c)] = v;
    }
    let rank_b = dense::rank(&b, RANK_TOL);
    let s = sym_curl_matrix(mesh, &vmap, &smap)?;
    let rank_sym_curl = dense::rank(&s, RANK_TOL);
    let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let max_b_sym_curl = max_abs(&(&b * &s));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> =
        (0..vmap.n_dofs()).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0).collect();
    let sigma = sym_curl_to_sigma(mesh, &vmap, &smap, &coeffs)?;
    let max_b_random = sys.b.mul_vec(&sigma).iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let mut max_rt_image = 0.0f64;
    for rt in rt_fields() {
        let img = sym_curl_to_sigma(mesh, &vmap, &smap, &interpolate_vh(mesh, &vmap, &rt))?;
        max_rt_image = img.iter().fold(max_rt_image, |a, v| a.max(v.abs()));
    }

    Ok(ComplexReport {
        n_sigma: smap.n_dofs(),
        n_u: sys.n_u(),
        n_vh: vmap.n_dofs(),
        rank_b,
        nullity_b: smap.n_dofs() - rank_b,
        expected_nullity: 6 * mesh.n_vertices() + 4 * mesh.n_edges() - 3,
        rank_sym_curl,
        max_b_sym_curl,
        max_b_random,
        max_rt_image,
    })
}

/// The lowest-order Raviart–Thomas fields `(1, 0)`, `(0, 1)`, `(x, y)`.
pub fn rt_fields() -> [VecPoly; 3] {
    let c = |a: f64, b: f64| VecPoly([Poly::constant(a), Poly::constant(b)]);
    [c(1.0, 0.0), c(0.0, 1.0), VecPoly([Poly::x(), Poly::y()])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> Element {
        Element::standalone([[0.1, -0.2], [1.3, 0.1], [0.4, 0.9]])
    }

    #[test]
    fn local_basis_is_dual() {
        let el = triangle();
        let b = VhLocalBasis::new(&el).unwrap();
        let g = b.gram(&el);
        for r in 0..VH_LOCAL {
            for c in 0..VH_LOCAL {
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((g[(r, c)] - e).abs() < 1e-10, "{r} {c} {}", g[(r, c)]);
            }
        }
        // vertex-value function: (1, 0) at its vertex, zero value and gradient elsewhere
        let f = &b.functions()[0];
        let c = b.center();
        let at = |i: usize| [el.coords[i][0] - c[0], el.coords[i][1] - c[1]];
        let v0 = f.eval(at(0)[0], at(0)[1]);
        assert!((v0[0] - 1.0).abs() < 1e-10 && v0[1].abs() < 1e-10);
        for i in 1..3 {
            let v = f.eval(at(i)[0], at(i)[1]);
            assert!(v[0].abs() < 1e-10 && v[1].abs() < 1e-10);
            assert!(f.0[0].dx().eval(at(i)[0], at(i)[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn counts() {
        let m = Mesh::unit_square(2).unwrap();
        let v = VhDofMap::new(&m);
        assert_eq!(v.n_dofs(), 6 * 9 + 4 * 16);
        assert_eq!(SigmaDofMap::new(&m).n_dofs(), v.n_dofs() - 3 + 3 * m.n_triangles());
    }

    #[test]
    fn rt_fields_have_zero_image() {
        for v in rt_fields() {
            let s = v.sym_curl();
            assert!(s.max_abs_coeff() == 0.0);
        }
    }

    #[test]
    fn sequence_is_exact_on_small_meshes() {
        for m in [Mesh::unit_square(2).unwrap(), Mesh::lshape(1).unwrap()] {
            let r = check_complex(&m, 11).unwrap();
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn inconsistent_input_is_reported() {
        // a stress vector written twice with different values
        let mut g = Gather::new(1);
        g.put(0, 1.0).unwrap();
        assert!(matches!(g.put(0, 1.5), Err(Error::Inconsistent { dof: 0, .. })));
    }

    proptest! {
        #[test]
        fn edge_identities_hold(coeffs in proptest::collection::vec(-1.0f64..1.0, 30), l in 0usize..3) {
            let el = triangle();
            let c = el.centroid();
            let mut v = VecPoly::zero(VH_DEGREE);
            for (k, a) in coeffs.iter().enumerate() {
                let (i, j) = crate::poly::mono_exponents(k % 15);
                v.0[k / 15].add_scaled(&Poly::monomial(i, j), *a);
            }
            prop_assert!(edge_identity_residual(&el, c, l, &v) < 1e-10);
        }
    }
}
