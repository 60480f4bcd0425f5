//! Dense bivariate polynomials.
//!
//! Coefficients are stored in graded order: `x^i y^j` with total degree
//! `d = i + j` lives at `d(d+1)/2 + j`. Element-local polynomials are written
//! in centroid-shifted physical coordinates `ξ = x − x_c`; the shift is kept
//! by the owner (see [`crate::basis::LocalBasis`]).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[inline]
pub const fn n_monomials(deg: usize) -> usize {
    (deg + 1) * (deg + 2) / 2
}

#[inline]
pub const fn mono_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Exponents `(i, j)` of the monomial stored at graded position `k`.
pub fn mono_exponents(k: usize) -> (usize, usize) {
    let mut d = 0;
    while n_monomials(d) <= k {
        d += 1;
    }
    let j = k - d * (d + 1) / 2;
    (d - j, j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    deg: usize,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero(deg: usize) -> Self {
        Self { deg, coeffs: vec![0.0; n_monomials(deg)] }
    }

    pub fn constant(c: f64) -> Self {
        Self { deg: 0, coeffs: vec![c] }
    }

    /// `a + bx·x + by·y`
    pub fn linear(a: f64, bx: f64, by: f64) -> Self {
        Self { deg: 1, coeffs: vec![a, bx, by] }
    }

    pub fn x() -> Self {
        Self::linear(0.0, 1.0, 0.0)
    }

    pub fn y() -> Self {
        Self::linear(0.0, 0.0, 1.0)
    }

    pub fn monomial(i: usize, j: usize) -> Self {
        let mut p = Self::zero(i + j);
        p.coeffs[mono_index(i, j)] = 1.0;
        p
    }

    pub fn from_coeffs(deg: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), n_monomials(deg), "coefficient count does not match degree");
        Self { deg, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.deg {
            0.0
        } else {
            self.coeffs[mono_index(i, j)]
        }
    }

    /// Highest degree carrying a coefficient above `tol` in magnitude.
    pub fn effective_degree(&self, tol: f64) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(k, _)| {
                let (i, j) = mono_exponents(k);
                i + j
            })
            .max()
            .unwrap_or(0)
    }

    pub fn with_degree(&self, deg: usize) -> Self {
        let mut out = Self::zero(deg.max(self.deg));
        out.coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in y for each total degree would need reordering; the
        // degrees here are small, so accumulate powers directly.
        let mut xp = [1.0f64; 12];
        let mut yp = [1.0f64; 12];
        for k in 1..=self.deg {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        let mut acc = 0.0;
        for d in 0..=self.deg {
            let base = d * (d + 1) / 2;
            for j in 0..=d {
                acc += self.coeffs[base + j] * xp[d - j] * yp[j];
            }
        }
        acc
    }

    pub fn dx(&self) -> Self {
        if self.deg == 0 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.deg - 1);
        for d in 1..=self.deg {
            for j in 0..d {
                let i = d - j;
                out.coeffs[mono_index(i - 1, j)] += i as f64 * self.coeffs[mono_index(i, j)];
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        if self.deg == 0 {
            return Self::zero(0);
        }
        let mut out = Self::zero(self.deg - 1);
        for d in 1..=self.deg {
            for j in 1..=d {
                let i = d - j;
                out.coeffs[mono_index(i, j - 1)] += j as f64 * self.coeffs[mono_index(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { deg: self.deg, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scaled(&mut self, other: &Poly, s: f64) {
        if other.deg > self.deg {
            *self = self.with_degree(other.deg);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Substitute `x ← a00·x + a01·y + b0`, `y ← a10·x + a11·y + b1`.
    pub fn compose_affine(&self, a: [[f64; 2]; 2], b: [f64; 2]) -> Self {
        let sx = Poly::linear(b[0], a[0][0], a[0][1]);
        let sy = Poly::linear(b[1], a[1][0], a[1][1]);
        let mut xp = vec![Poly::constant(1.0)];
        let mut yp = vec![Poly::constant(1.0)];
        for k in 1..=self.deg {
            xp.push(&xp[k - 1] * &sx);
            yp.push(&yp[k - 1] * &sy);
        }
        let mut out = Self::zero(self.deg);
        for k in 0..self.coeffs.len() {
            let c = self.coeffs[k];
            if c != 0.0 {
                let (i, j) = mono_exponents(k);
                out.add_scaled(&(&xp[i] * &yp[j]), c);
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.with_degree(rhs.deg);
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.with_degree(rhs.deg);
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.deg + rhs.deg);
        for (ka, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let (ia, ja) = mono_exponents(ka);
            for (kb, &cb) in rhs.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                let (ib, jb) = mono_exponents(kb);
                out.coeffs[mono_index(ia + ib, ja + jb)] += ca * cb;
            }
        }
        out
    }
}

impl Mul<f64> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: f64) -> Poly {
        self.scale(rhs)
    }
}

/// A 2-vector of polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct VecPoly(pub [Poly; 2]);

impl VecPoly {
    pub fn zero(deg: usize) -> Self {
        Self([Poly::zero(deg), Poly::zero(deg)])
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.0[0].eval(x, y), self.0[1].eval(x, y)]
    }

    pub fn div(&self) -> Poly {
        &self.0[0].dx() + &self.0[1].dy()
    }

    pub fn add_scaled(&mut self, other: &VecPoly, s: f64) {
        self.0[0].add_scaled(&other.0[0], s);
        self.0[1].add_scaled(&other.0[1], s);
    }

    pub fn scale(&self, s: f64) -> Self {
        Self([self.0[0].scale(s), self.0[1].scale(s)])
    }

    /// Row-wise curl, symmetrised: rows of `curl v` are `(−∂_y v_i, ∂_x v_i)`.
    pub fn sym_curl(&self) -> SymPoly {
        let c00 = -&self.0[0].dy();
        let c01 = self.0[0].dx();
        let c10 = -&self.0[1].dy();
        let c11 = self.0[1].dx();
        let off = (&c01 + &c10).scale(0.5);
        SymPoly { xx: c00, xy: off, yy: c11 }
    }
}

/// A symmetric 2×2 tensor field with polynomial entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPoly {
    pub xx: Poly,
    pub xy: Poly,
    pub yy: Poly,
}

impl SymPoly {
    pub fn zero(deg: usize) -> Self {
        Self { xx: Poly::zero(deg), xy: Poly::zero(deg), yy: Poly::zero(deg) }
    }

    /// `p · m` for a constant symmetric matrix `m = [[m00, m01], [m01, m11]]`.
    pub fn scalar_times(p: &Poly, m: [[f64; 2]; 2]) -> Self {
        Self { xx: p.scale(m[0][0]), xy: p.scale(m[0][1]), yy: p.scale(m[1][1]) }
    }

    pub fn eval(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let a = self.xx.eval(x, y);
        let b = self.xy.eval(x, y);
        let c = self.yy.eval(x, y);
        [[a, b], [b, c]]
    }

    pub fn components(&self) -> [&Poly; 3] {
        [&self.xx, &self.xy, &self.yy]
    }

    pub fn degree(&self) -> usize {
        self.xx.degree().max(self.xy.degree()).max(self.yy.degree())
    }

    pub fn div(&self) -> VecPoly {
        VecPoly([&self.xx.dx() + &self.xy.dy(), &self.xy.dx() + &self.yy.dy()])
    }

    pub fn divdiv(&self) -> Poly {
        let a = self.xx.dx().dx();
        let b = self.xy.dx().dy().scale(2.0);
        let c = self.yy.dy().dy();
        &(&a + &b) + &c
    }

    pub fn add_scaled(&mut self, other: &SymPoly, s: f64) {
        self.xx.add_scaled(&other.xx, s);
        self.xy.add_scaled(&other.xy, s);
        self.yy.add_scaled(&other.yy, s);
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { xx: self.xx.scale(s), xy: self.xy.scale(s), yy: self.yy.scale(s) }
    }

    /// `B · self · Bᵀ` with a constant matrix `B`.
    pub fn congruence(&self, b: [[f64; 2]; 2]) -> Self {
        // (BτBᵀ)_{ij} = Σ_kl B_ik τ_kl B_jl
        let comp = |i: usize, j: usize| {
            let mut p = Poly::zero(self.degree());
            p.add_scaled(&self.xx, b[i][0] * b[j][0]);
            p.add_scaled(&self.xy, b[i][0] * b[j][1] + b[i][1] * b[j][0]);
            p.add_scaled(&self.yy, b[i][1] * b[j][1]);
            p
        };
        Self { xx: comp(0, 0), xy: comp(0, 1), yy: comp(1, 1) }
    }

    pub fn compose_affine(&self, a: [[f64; 2]; 2], b: [f64; 2]) -> Self {
        Self { xx: self.xx.compose_affine(a, b), xy: self.xy.compose_affine(a, b), yy: self.yy.compose_affine(a, b) }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.xx.max_abs_coeff().max(self.xy.max_abs_coeff()).max(self.yy.max_abs_coeff())
    }
}

/// Frobenius product `a : b` of two symmetric matrices.
#[inline]
pub fn frobenius(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    a[0][0] * b[0][0] + 2.0 * a[0][1] * b[0][1] + a[1][1] * b[1][1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn graded_indexing_roundtrips() {
        for k in 0..n_monomials(6) {
            let (i, j) = mono_exponents(k);
            assert_eq!(mono_index(i, j), k);
        }
    }

    #[test]
    fn derivatives_of_monomial() {
        let p = Poly::monomial(3, 2);
        assert_eq!(p.dx().coeff(2, 2), 3.0);
        assert_eq!(p.dy().coeff(3, 1), 2.0);
        assert_eq!(p.dx().dx().dx().dx().max_abs_coeff(), 0.0);
    }

    #[test]
    fn sym_curl_of_lowest_order_rt_vanishes() {
        // v = (a1 + b x, a2 + b y)
        let v = VecPoly([Poly::linear(0.3, 1.7, 0.0), Poly::linear(-2.0, 0.0, 1.7)]);
        assert_eq!(v.sym_curl().max_abs_coeff(), 0.0);
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(
            a in proptest::collection::vec(-2.0f64..2.0, 10),
            b in proptest::collection::vec(-2.0f64..2.0, 6),
            x in -1.0f64..1.0, y in -1.0f64..1.0,
        ) {
            let p = Poly::from_coeffs(3, a);
            let q = Poly::from_coeffs(2, b);
            let lhs = (&p * &q).eval(x, y);
            let rhs = p.eval(x, y) * q.eval(x, y);
            prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn affine_composition_matches_substitution(
            c in proptest::collection::vec(-1.0f64..1.0, 10),
            a00 in -2.0f64..2.0, a01 in -2.0f64..2.0, a10 in -2.0f64..2.0, a11 in -2.0f64..2.0,
            b0 in -1.0f64..1.0, b1 in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0,
        ) {
            let p = Poly::from_coeffs(3, c);
            let q = p.compose_affine([[a00, a01], [a10, a11]], [b0, b1]);
            let direct = p.eval(a00 * x + a01 * y + b0, a10 * x + a11 * y + b1);
            prop_assert!((q.eval(x, y) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }
}
