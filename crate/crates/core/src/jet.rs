//! Truncated bivariate Taylor arithmetic up to total order four.
//!
//! A [`Jet4`] holds the Taylor coefficients `c_ij` of a function around an
//! expansion point `(x0, y0)`, i.e. `f(x0 + δx, y0 + δy) ≈ Σ c_ij δx^i δy^j`
//! for `i + j ≤ 4`, in the same graded order as [`crate::poly`]. Elementary
//! functions are applied by composing the univariate Taylor expansion of the
//! function at the jet's constant term with the jet's non-constant part.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::poly::{mono_exponents, mono_index};

pub const ORDER: usize = 4;
pub const LEN: usize = 15;

const FACTORIAL: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet4 {
    c: [f64; LEN],
}

impl Jet4 {
    pub const fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Self { c }
    }

    /// The coordinate function `x` expanded at `x0`.
    pub const fn var_x(x0: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = x0;
        c[1] = 1.0;
        Self { c }
    }

    /// The coordinate function `y` expanded at `y0`.
    pub const fn var_y(y0: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = y0;
        c[2] = 1.0;
        Self { c }
    }

    pub fn from_coeffs(c: [f64; LEN]) -> Self {
        Self { c }
    }

    pub fn coeffs(&self) -> &[f64; LEN] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `δx^i δy^j`.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > ORDER {
            0.0
        } else {
            self.c[mono_index(i, j)]
        }
    }

    /// `∂^{i+j} f / ∂x^i ∂y^j` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        if i + j > ORDER {
            return 0.0;
        }
        FACTORIAL[i] * FACTORIAL[j] * self.c[mono_index(i, j)]
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.derivative(1, 0), self.derivative(0, 1)]
    }

    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let xy = self.derivative(1, 1);
        [[self.derivative(2, 0), xy], [xy, self.derivative(0, 2)]]
    }

    /// `Δ²f = f_xxxx + 2 f_xxyy + f_yyyy`
    pub fn bilaplacian(&self) -> f64 {
        24.0 * self.coeff(4, 0) + 8.0 * self.coeff(2, 2) + 24.0 * self.coeff(0, 4)
    }

    pub fn laplacian(&self) -> f64 {
        2.0 * (self.coeff(2, 0) + self.coeff(0, 2))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Applies a univariate function given its Taylor coefficients
    /// `t[k] = g^{(k)}(a) / k!` at `a = self.value()`.
    pub fn compose(&self, t: [f64; ORDER + 1]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Self::constant(t[0]);
        let mut power = Self::constant(1.0);
        for &tk in &t[1..] {
            power = power * delta;
            out = out + power.scale(tk);
        }
        out
    }

    /// `self^p` for real `p`; the constant term must be positive.
    pub fn powf(&self, p: f64) -> Self {
        let a = self.c[0];
        let mut t = [0.0; ORDER + 1];
        let mut binom = 1.0;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = binom * num_traits::Float::powf(a, p - k as f64);
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(t)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        let a = self.c[0];
        let mut t = [0.0; ORDER + 1];
        let mut ak = 1.0 / a;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = if k % 2 == 0 { ak } else { -ak };
            ak /= a;
        }
        self.compose(t)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (libm::sin(self.c[0]), libm::cos(self.c[0]));
        self.compose([s, c, -s / 2.0, -c / 6.0, s / 24.0])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (libm::sin(self.c[0]), libm::cos(self.c[0]));
        self.compose([c, -s, -c / 2.0, s / 6.0, c / 24.0])
    }

    pub fn atan(&self) -> Self {
        let a = self.c[0];
        let q = 1.0 + a * a;
        self.compose([
            libm::atan(a),
            1.0 / q,
            -a / (q * q),
            (3.0 * a * a - 1.0) / (3.0 * q * q * q),
            a * (1.0 - a * a) / (q * q * q * q),
        ])
    }
}

impl Add for Jet4 {
    type Output = Jet4;
    fn add(mut self, rhs: Jet4) -> Jet4 {
        self.c.iter_mut().zip(rhs.c).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Jet4 {
    type Output = Jet4;
    fn sub(mut self, rhs: Jet4) -> Jet4 {
        self.c.iter_mut().zip(rhs.c).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for Jet4 {
    type Output = Jet4;
    fn neg(self) -> Jet4 {
        self.scale(-1.0)
    }
}

impl Mul for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        let mut out = [0.0; LEN];
        for ka in 0..LEN {
            let ca = self.c[ka];
            if ca == 0.0 {
                continue;
            }
            let (ia, ja) = mono_exponents(ka);
            for kb in 0..LEN {
                let (ib, jb) = mono_exponents(kb);
                if ia + ja + ib + jb > ORDER {
                    break;
                }
                out[mono_index(ia + ib, ja + jb)] += ca * rhs.c[kb];
            }
        }
        Jet4 { c: out }
    }
}

impl Div for Jet4 {
    type Output = Jet4;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet4) -> Jet4 {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet4 {
    type Output = Jet4;
    fn add(mut self, rhs: f64) -> Jet4 {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet4 {
    type Output = Jet4;
    fn sub(mut self, rhs: f64) -> Jet4 {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: f64) -> Jet4 {
        self.scale(rhs)
    }
}

impl Mul<Jet4> for f64 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        rhs.scale(self)
    }
}

impl Sub<Jet4> for f64 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        -rhs + self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polynomial_mixed_derivative() {
        let x = Jet4::var_x(1.0);
        let y = Jet4::var_y(2.0);
        let f = x * x * y;
        assert_eq!(f.derivative(1, 1), 2.0);
        assert_eq!(f.derivative(2, 0), 4.0);
        assert_eq!(f.value(), 2.0);
    }

    #[test]
    fn sine_series_at_zero() {
        let s = Jet4::var_x(0.0).sin();
        let expect = [0.0, 1.0, 0.0, -1.0 / 6.0, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((s.coeff(k, 0) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn radial_power_derivative() {
        let alpha = 0.544483736782464;
        let (x, y) = (Jet4::var_x(1.0), Jet4::var_y(0.0));
        let r2 = x * x + y * y;
        let f = r2.powf((1.0 + alpha) / 2.0);
        assert!((f.derivative(1, 0) - (1.0 + alpha)).abs() < 1e-14);
    }

    #[test]
    fn atan_fourth_coefficient() {
        // atan(z) = z − z³/3 + ... at 0, and exact rational checks at a = 1.
        let z = Jet4::var_x(0.0).atan();
        assert!((z.coeff(3, 0) + 1.0 / 3.0).abs() < 1e-15);
        let w = Jet4::var_x(1.0).atan();
        assert!((w.coeff(1, 0) - 0.5).abs() < 1e-15);
        assert!((w.coeff(2, 0) + 0.25).abs() < 1e-15);
        assert!((w.coeff(3, 0) - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(w.coeff(4, 0), 0.0);
    }

    proptest! {
        #[test]
        fn reciprocal_inverts(a in 0.5f64..3.0, b in -1.0f64..1.0, x0 in -1.0f64..1.0, y0 in -1.0f64..1.0) {
            let f = Jet4::var_x(x0) * b + Jet4::var_y(y0) * Jet4::var_x(x0) + a + 2.0;
            let one = f * f.recip();
            prop_assert!((one.value() - 1.0).abs() < 1e-13);
            for k in 1..LEN {
                prop_assert!(one.coeffs()[k].abs() < 1e-12);
            }
        }

        #[test]
        fn pythagorean_identity(x0 in -2.0f64..2.0, y0 in -2.0f64..2.0) {
            let g = Jet4::var_x(x0) * Jet4::var_y(y0) + Jet4::var_x(x0).sin();
            let id = g.sin() * g.sin() + g.cos() * g.cos();
            prop_assert!((id.value() - 1.0).abs() < 1e-13);
            for k in 1..LEN {
                prop_assert!(id.coeffs()[k].abs() < 1e-12);
            }
        }
    }
}
