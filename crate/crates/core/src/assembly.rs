//! Element kernels and global assembly of the saddle-point system
//!
//! ```text
//! [ M  Bᵀ ] [σ]   [ 0 ]
//! [ B  0  ] [u] = [ ℓ ]
//! ```
//!
//! with `M_ij = (τ_j, τ_i)`, `B_rj = (div div τ_j, λ_r)` and `ℓ_r = −(f, λ_r)`.
//! Element blocks are independent of each other; [`merge`] sums them in the
//! order given, so any parallel producer that keeps element order yields
//! bit-identical matrices.

use alloc::vec::Vec;

use crate::basis::{LocalBasis, N_LOCAL};
use crate::dofmap::{DisplacementDofMap, SigmaDofMap};
use crate::mesh::{Element, Mesh, Point};
use crate::poly::frobenius;
use crate::quadrature::{triangle_rule, TriangleRule, DEGREE_POLY, DEGREE_SINGULAR, DEGREE_SMOOTH};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Scalar load callback.
pub type LoadFn<'a> = dyn Fn(f64, f64) -> Result<f64> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Degree for basis-by-basis products.
    pub poly_degree: usize,
    /// Degree for integrands involving exact data.
    pub smooth_degree: usize,
    /// Degree on triangles touching `singular_point`.
    pub singular_degree: usize,
    pub singular_point: Option<Point>,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            poly_degree: DEGREE_POLY,
            smooth_degree: DEGREE_SMOOTH,
            singular_degree: DEGREE_SINGULAR,
            singular_point: None,
        }
    }
}

impl QuadratureOptions {
    pub fn with_singular_point(mut self, p: Option<Point>) -> Self {
        self.singular_point = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.poly_degree < 6 {
            return Err(Error::InvalidArgument(alloc::format!(
                "quadrature degree {} cannot integrate products of cubic fields (need at least 6)",
                self.poly_degree
            )));
        }
        Ok(())
    }

    pub fn touches_singularity(&self, el: &Element) -> bool {
        match self.singular_point {
            Some(p) => el.coords.iter().any(|c| (c[0] - p[0]).abs() < 1e-12 && (c[1] - p[1]).abs() < 1e-12),
            None => false,
        }
    }

    /// Degree for exact-data integrals on `el`.
    pub fn data_degree(&self, el: &Element) -> usize {
        if self.touches_singularity(el) {
            self.singular_degree
        } else {
            self.smooth_degree
        }
    }
}

/// Rules built once and shared by all element kernels.
#[derive(Debug, Clone)]
pub struct Rules {
    pub poly: TriangleRule,
    pub smooth: TriangleRule,
    pub singular: TriangleRule,
    pub options: QuadratureOptions,
}

impl Rules {
    pub fn new(options: QuadratureOptions) -> Result<Self> {
        options.validate()?;
        Ok(Self {
            poly: triangle_rule(options.poly_degree)?,
            smooth: triangle_rule(options.smooth_degree)?,
            singular: triangle_rule(options.singular_degree)?,
            options,
        })
    }

    pub fn data_rule(&self, el: &Element) -> &TriangleRule {
        if self.options.touches_singularity(el) {
            &self.singular
        } else {
            &self.smooth
        }
    }
}

/// Signed element contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBlock {
    pub element: usize,
    pub sigma_dofs: [usize; N_LOCAL],
    pub mass: [[f64; N_LOCAL]; N_LOCAL],
    pub divdiv: [[f64; N_LOCAL]; 3],
    pub load: [f64; 3],
    pub disp_mass: [[f64; 3]; 3],
}

/// Local mass matrix of the barycentric functions on a triangle of area `a`.
pub fn displacement_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

pub fn element_block(
    mesh: &Mesh,
    map: &SigmaDofMap,
    t: usize,
    load: Option<&LoadFn<'_>>,
    rules: &Rules,
) -> Result<ElementBlock> {
    let el = mesh.element(t);
    let basis = LocalBasis::new(&el)?;
    element_block_with_basis(&el, &basis, map, load, rules)
}

pub fn element_block_with_basis(
    el: &Element,
    basis: &LocalBasis,
    map: &SigmaDofMap,
    load: Option<&LoadFn<'_>>,
    rules: &Rules,
) -> Result<ElementBlock> {
    let t = el.id;
    let signs = map.signs(t);
    let jac = el.jacobian();
    let c = basis.center();
    let dd: Vec<_> = basis.functions().iter().map(|f| f.divdiv()).collect();

    let mut mass = [[0.0; N_LOCAL]; N_LOCAL];
    let mut divdiv = [[0.0; N_LOCAL]; 3];
    let mut vals = [[[0.0; 2]; 2]; N_LOCAL];
    for (p, w) in rules.poly.iter() {
        let x = el.to_physical(*p);
        let xi = [x[0] - c[0], x[1] - c[1]];
        let lam = [1.0 - p[0] - p[1], p[0], p[1]];
        let wj = w * jac;
        for (i, v) in vals.iter_mut().enumerate() {
            *v = basis.functions()[i].eval(xi[0], xi[1]);
        }
        for i in 0..N_LOCAL {
            for j in i..N_LOCAL {
                mass[i][j] += wj * frobenius(&vals[i], &vals[j]);
            }
            let d = dd[i].eval(xi[0], xi[1]);
            for r in 0..3 {
                divdiv[r][i] += wj * d * lam[r];
            }
        }
    }
    for i in 0..N_LOCAL {
        for j in i..N_LOCAL {
            let v = mass[i][j] * signs[i] * signs[j];
            mass[i][j] = v;
            mass[j][i] = v;
        }
        for row in divdiv.iter_mut() {
            row[i] *= signs[i];
        }
    }

    let mut rhs = [0.0; 3];
    if let Some(f) = load {
        for (p, w) in rules.data_rule(el).iter() {
            let x = el.to_physical(*p);
            let fv = f(x[0], x[1])?;
            let lam = [1.0 - p[0] - p[1], p[0], p[1]];
            for r in 0..3 {
                rhs[r] -= w * jac * fv * lam[r];
            }
        }
    }

    Ok(ElementBlock {
        element: t,
        sigma_dofs: *map.global(t),
        mass,
        divdiv,
        load: rhs,
        disp_mass: displacement_mass(el.area()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    pub m: CsrMatrix,
    pub b: CsrMatrix,
    pub load: Vec<f64>,
    /// Mass matrix of the displacement space.
    pub disp_mass: CsrMatrix,
}

impl SaddleSystem {
    pub fn n_sigma(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.b.nrows()
    }

    /// `(‖Mσ + Bᵀu‖, ‖Bσ − ℓ‖)` in the max norm.
    pub fn residuals(&self, sigma: &[f64], u: &[f64]) -> (f64, f64) {
        let mut r1 = self.m.mul_vec(sigma);
        for (a, b) in r1.iter_mut().zip(self.b.tr_mul_vec(u)) {
            *a += b;
        }
        let r2 = self.b.mul_vec(sigma);
        let n1 = r1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n2 = r2.iter().zip(&self.load).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        (n1, n2)
    }
}

/// Sums element blocks in the order given.
pub fn merge(n_sigma: usize, n_u: usize, blocks: &[ElementBlock]) -> SaddleSystem {
    let mut m_trip = Vec::with_capacity(blocks.len() * N_LOCAL * N_LOCAL);
    let mut b_trip = Vec::with_capacity(blocks.len() * 3 * N_LOCAL);
    let mut mu_trip = Vec::with_capacity(blocks.len() * 9);
    let mut load = alloc::vec![0.0; n_u];
    for blk in blocks {
        let rows = [3 * blk.element, 3 * blk.element + 1, 3 * blk.element + 2];
        for i in 0..N_LOCAL {
            for j in 0..N_LOCAL {
                m_trip.push((blk.sigma_dofs[i], blk.sigma_dofs[j], blk.mass[i][j]));
            }
        }
        for r in 0..3 {
            for j in 0..N_LOCAL {
                b_trip.push((rows[r], blk.sigma_dofs[j], blk.divdiv[r][j]));
            }
            for s in 0..3 {
                mu_trip.push((rows[r], rows[s], blk.disp_mass[r][s]));
            }
            load[rows[r]] += blk.load[r];
        }
    }
    SaddleSystem {
        m: CsrMatrix::from_triplets(n_sigma, n_sigma, &m_trip),
        b: CsrMatrix::from_triplets(n_u, n_sigma, &b_trip),
        load,
        disp_mass: CsrMatrix::from_triplets(n_u, n_u, &mu_trip),
    }
}

/// Sequential assembly over all triangles.
pub fn assemble(
    mesh: &Mesh,
    map: &SigmaDofMap,
    load: Option<&LoadFn<'_>>,
    options: QuadratureOptions,
) -> Result<SaddleSystem> {
    let rules = Rules::new(options)?;
    let blocks =
        (0..mesh.n_triangles()).map(|t| element_block(mesh, map, t, load, &rules)).collect::<Result<Vec<_>>>()?;
    Ok(merge(map.n_dofs(), DisplacementDofMap::new(mesh).n_dofs(), &blocks))
}
