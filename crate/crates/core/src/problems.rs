//! Manufactured clamped-plate solutions.
//!
//! Each problem evaluates `u` as a [`Jet4`] at a point; `σ = −∇²u` and the
//! load `f = Δ²u` are read off the jet.

use core::f64::consts::PI;

use crate::jet::Jet4;
use crate::mesh::{Domain, Point};
use crate::{Error, Result};

pub trait Manufactured: Sync {
    fn name(&self) -> &'static str;

    fn domain(&self) -> Domain;

    /// Taylor jet of `u` at `(x, y)`.
    fn jet(&self, x: f64, y: f64) -> Result<Jet4>;

    /// Point where the solution is not smooth, if any.
    fn singular_point(&self) -> Option<Point> {
        None
    }

    fn u(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.jet(x, y)?.value())
    }

    fn gradient(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        Ok(self.jet(x, y)?.gradient())
    }

    fn hessian(&self, x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
        Ok(self.jet(x, y)?.hessian())
    }

    fn sigma(&self, x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
        let h = self.hessian(x, y)?;
        Ok([[-h[0][0], -h[0][1]], [-h[1][0], -h[1][1]]])
    }

    fn load(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.jet(x, y)?.bilaplacian())
    }
}

/// `u = x²(1−x)² y²(1−y)²` on the unit square.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothSquare;

impl Manufactured for SmoothSquare {
    fn name(&self) -> &'static str {
        "smooth-square"
    }

    fn domain(&self) -> Domain {
        Domain::UnitSquare
    }

    fn jet(&self, x: f64, y: f64) -> Result<Jet4> {
        let (x, y) = (Jet4::var_x(x), Jet4::var_y(y));
        let a = x * (1.0 - x);
        let b = y * (1.0 - y);
        Ok(a * a * b * b)
    }
}

/// Corner singularity on the L-shape:
/// `u = (1−x²)²(1−y²)² r^{1+α} g(θ)` with the angular profile `g` of the
/// clamped re-entrant corner of opening `ω = 3π/2`, and `θ ∈ [0, 3π/2]`
/// measured counterclockwise from the positive x-axis.
#[derive(Debug, Clone, Copy)]
pub struct LShapeCorner {
    pub alpha: f64,
    pub omega: f64,
    g1: f64,
    g2: f64,
}

pub const CORNER_ALPHA: f64 = 0.544483736782464;

impl Default for LShapeCorner {
    fn default() -> Self {
        Self::new(CORNER_ALPHA, 1.5 * PI)
    }
}

impl LShapeCorner {
    pub fn new(alpha: f64, omega: f64) -> Self {
        let (am, ap) = (alpha - 1.0, alpha + 1.0);
        let g1 = libm::sin(am * omega) / am - libm::sin(ap * omega) / ap;
        let g2 = libm::cos(am * omega) - libm::cos(ap * omega);
        Self { alpha, omega, g1, g2 }
    }

    /// `|sin²(αω) − α² sin²(ω)|`
    pub fn root_residual(&self) -> f64 {
        let s = libm::sin(self.alpha * self.omega);
        let w = libm::sin(self.omega);
        (s * s - self.alpha * self.alpha * w * w).abs()
    }

    pub fn angle(x: f64, y: f64) -> f64 {
        let t = libm::atan2(y, x);
        if t < 0.0 {
            t + 2.0 * PI
        } else {
            t
        }
    }

    fn profile(&self, theta: Jet4) -> Jet4 {
        let (am, ap) = (self.alpha - 1.0, self.alpha + 1.0);
        let c = (theta * am).cos() - (theta * ap).cos();
        let s = (theta * am).sin() * (1.0 / am) - (theta * ap).sin() * (1.0 / ap);
        c * self.g1 - s * self.g2
    }
}

impl Manufactured for LShapeCorner {
    fn name(&self) -> &'static str {
        "lshape-corner"
    }

    fn domain(&self) -> Domain {
        Domain::LShape
    }

    fn singular_point(&self) -> Option<Point> {
        Some([0.0, 0.0])
    }

    fn jet(&self, x0: f64, y0: f64) -> Result<Jet4> {
        let r0 = x0 * x0 + y0 * y0;
        if r0 == 0.0 {
            return Err(Error::Singular { x: x0, y: y0 });
        }
        let (x, y) = (Jet4::var_x(x0), Jet4::var_y(y0));
        let (dx, dy) = (x - x0, y - y0);
        let radial = (x * x + y * y).powf(0.5 * (1.0 + self.alpha));
        // θ = θ0 + atan(cross / dot) stays on one branch near (x0, y0)
        let cross = dy * x0 - dx * y0;
        let dot = dx * x0 + dy * y0 + r0;
        let theta = (cross / dot).atan() + Self::angle(x0, y0);
        let bx = 1.0 - x * x;
        let by = 1.0 - y * y;
        Ok(bx * bx * by * by * radial * self.profile(theta))
    }
}
