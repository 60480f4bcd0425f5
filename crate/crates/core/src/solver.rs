//! Solvers for the saddle-point system and the discrete inf-sup estimate.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::assembly::SaddleSystem;
use crate::dense;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Sparse LU of the full KKT matrix with iterative refinement.
    Direct,
    /// MINRES with the block-diagonal preconditioner `diag(M, B D⁻¹ Bᵀ)`,
    /// `D = diag(M)`.
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    /// Relative KKT residual target.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { method: Method::Direct, tol: 1e-10, max_iterations: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    /// `‖K x − b‖₂ / ‖b‖₂` (absolute when `b = 0`).
    pub relative_residual: f64,
    /// Refinement steps (direct) or MINRES iterations (Krylov).
    pub iterations: usize,
    pub history: Vec<f64>,
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `K x` for the KKT matrix.
fn kkt_apply(sys: &SaddleSystem, x: &[f64]) -> Vec<f64> {
    let ns = sys.n_sigma();
    let (s, u) = x.split_at(ns);
    let mut top = sys.m.mul_vec(s);
    for (a, b) in top.iter_mut().zip(sys.b.tr_mul_vec(u)) {
        *a += b;
    }
    top.extend(sys.b.mul_vec(s));
    top
}

fn kkt_rhs(sys: &SaddleSystem) -> Vec<f64> {
    let mut rhs = vec![0.0; sys.n_sigma()];
    rhs.extend_from_slice(&sys.load);
    rhs
}

fn relative_residual(sys: &SaddleSystem, x: &[f64], rhs: &[f64]) -> (Vec<f64>, f64) {
    let kx = kkt_apply(sys, x);
    let r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, k)| b - k).collect();
    let nb = norm2(rhs);
    let nr = norm2(&r);
    (r, if nb > 0.0 { nr / nb } else { nr })
}

fn to_faer(n: usize, entries: impl Iterator<Item = (usize, usize, f64)>) -> Result<SparseColMat<usize, f64>> {
    let t: Vec<Triplet<usize, usize, f64>> = entries.map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
        .map_err(|e| Error::Factorization(alloc::format!("{e:?}")))
}

fn kkt_matrix(sys: &SaddleSystem) -> Result<SparseColMat<usize, f64>> {
    let ns = sys.n_sigma();
    let n = ns + sys.n_u();
    let entries = sys.m.triplets().chain(sys.b.triplets().flat_map(|(r, c, v)| [(ns + r, c, v), (c, ns + r, v)]));
    to_faer(n, entries)
}

fn mat_col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn col_vec(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

pub fn solve(sys: &SaddleSystem, opts: &SolverOptions) -> Result<SaddleSolution> {
    let rhs = kkt_rhs(sys);
    let ns = sys.n_sigma();
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(SaddleSolution {
            sigma: vec![0.0; ns],
            u: vec![0.0; sys.n_u()],
            relative_residual: 0.0,
            iterations: 0,
            history: Vec::new(),
        });
    }
    match opts.method {
        Method::Direct => solve_direct(sys, &rhs, opts),
        Method::Krylov => solve_minres(sys, &rhs, opts),
    }
}

fn solve_direct(sys: &SaddleSystem, rhs: &[f64], opts: &SolverOptions) -> Result<SaddleSolution> {
    let k = kkt_matrix(sys)?;
    let lu = k.sp_lu().map_err(|e| Error::Factorization(alloc::format!("{e:?}")))?;
    let mut x = col_vec(&lu.solve(&mat_col(rhs)));
    let (mut r, mut rel) = relative_residual(sys, &x, rhs);
    let mut history = vec![rel];
    let mut steps = 0;
    while !(rel <= opts.tol) && steps < 10 {
        let d = col_vec(&lu.solve(&mat_col(&r)));
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        let (r2, rel2) = relative_residual(sys, &x, rhs);
        steps += 1;
        history.push(rel2);
        if !rel2.is_finite() || rel2 >= rel {
            r = r2;
            rel = rel2;
            break;
        }
        r = r2;
        rel = rel2;
    }
    let _ = r;
    if !(rel <= opts.tol) {
        return Err(Error::NotConverged { residual: rel, iterations: steps, history });
    }
    let u = x.split_off(sys.n_sigma());
    Ok(SaddleSolution { sigma: x, u, relative_residual: rel, iterations: steps, history })
}

/// Block-diagonal preconditioner `diag(M, B D⁻¹ Bᵀ)` applied through sparse
/// Cholesky factors.
struct BlockPreconditioner {
    m: faer::sparse::linalg::solvers::Llt<usize, f64>,
    s: faer::sparse::linalg::solvers::Llt<usize, f64>,
    ns: usize,
}

fn schur_approximation(b: &CsrMatrix, diag: &[f64]) -> Vec<(usize, usize, f64)> {
    let bt = b.transpose();
    let mut out = Vec::new();
    for i in 0..b.nrows() {
        for (k, bik) in b.row(i) {
            let scale = bik / diag[k];
            for (j, bjk) in bt.row(k) {
                out.push((i, j, scale * bjk));
            }
        }
    }
    out
}

impl BlockPreconditioner {
    fn new(sys: &SaddleSystem) -> Result<Self> {
        let ns = sys.n_sigma();
        let factor = |a: SparseColMat<usize, f64>, what: &str| {
            a.sp_cholesky(Side::Lower).map_err(|e| Error::Factorization(alloc::format!("{what}: {e:?}")))
        };
        let m = factor(to_faer(ns, sys.m.triplets())?, "stress mass matrix")?;
        let diag = sys.m.diagonal();
        if diag.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::Factorization("mass matrix has a non-positive diagonal".to_string()));
        }
        let s_trip = CsrMatrix::from_triplets(sys.n_u(), sys.n_u(), &schur_approximation(&sys.b, &diag));
        let s = factor(to_faer(sys.n_u(), s_trip.triplets())?, "approximate Schur complement")
            .map_err(|_| Error::RankDeficient { smallest: 0.0 })?;
        Ok(Self { m, s, ns })
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let (top, bottom) = v.split_at(self.ns);
        let mut out = col_vec(&self.m.solve(&mat_col(top)));
        out.extend(col_vec(&self.s.solve(&mat_col(bottom))));
        out
    }
}

fn solve_minres(sys: &SaddleSystem, rhs: &[f64], opts: &SolverOptions) -> Result<SaddleSolution> {
    let n = rhs.len();
    let pre = BlockPreconditioner::new(sys)?;
    let mut x = vec![0.0; n];
    let mut v_prev = vec![0.0; n];
    let mut v = rhs.to_vec();
    let mut z = pre.apply(&v);
    let mut gamma = libm::sqrt(dot(&z, &v));
    let gamma0 = gamma;
    let mut gamma_prev = 1.0;
    let mut eta = gamma;
    let (mut s_prev, mut s) = (0.0, 0.0);
    let (mut c_prev, mut c) = (1.0, 1.0);
    let mut w_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut history = Vec::new();
    let mut rel = 1.0;
    for it in 1..=opts.max_iterations {
        z.iter_mut().for_each(|zi| *zi /= gamma);
        let az = kkt_apply(sys, &z);
        let delta = dot(&az, &z);
        let v_next: Vec<f64> =
            (0..n).map(|i| az[i] - (delta / gamma) * v[i] - (gamma / gamma_prev) * v_prev[i]).collect();
        let z_next = pre.apply(&v_next);
        let gamma_next = libm::sqrt(dot(&z_next, &v_next).max(0.0));
        let a0 = c * delta - c_prev * s * gamma;
        let a1 = libm::sqrt(a0 * a0 + gamma_next * gamma_next);
        let a2 = s * delta + c_prev * c * gamma;
        let a3 = s_prev * gamma;
        let (c_next, s_next) = (a0 / a1, gamma_next / a1);
        let w_next: Vec<f64> = (0..n).map(|i| (z[i] - a3 * w_prev[i] - a2 * w[i]) / a1).collect();
        for i in 0..n {
            x[i] += c_next * eta * w_next[i];
        }
        eta *= -s_next;
        history.push(eta.abs() / gamma0);
        if !a1.is_finite() || a1 == 0.0 {
            return Err(Error::NotConverged { residual: rel, iterations: it, history });
        }
        if eta.abs() / gamma0 < opts.tol || it % 25 == 0 || gamma_next == 0.0 {
            rel = relative_residual(sys, &x, rhs).1;
            if rel <= opts.tol {
                let u = x.split_off(sys.n_sigma());
                return Ok(SaddleSolution { sigma: x, u, relative_residual: rel, iterations: it, history });
            }
            if gamma_next == 0.0 {
                break;
            }
        }
        v_prev = core::mem::replace(&mut v, v_next);
        z = z_next;
        gamma_prev = gamma;
        gamma = gamma_next;
        s_prev = s;
        s = s_next;
        c_prev = c;
        c = c_next;
        w_prev = core::mem::replace(&mut w, w_next);
    }
    Err(Error::NotConverged { residual: rel, iterations: history.len(), history })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfSup {
    pub beta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Largest stress dimension accepted by the dense inf-sup estimate.
pub const INFSUP_MAX_DOFS: usize = 6000;

/// `β_h = √λ_min` for `B A⁻¹ Bᵀ x = λ M_u x`, `A = M + Bᵀ M_u⁻¹ B`.
pub fn estimate_infsup(sys: &SaddleSystem) -> Result<InfSup> {
    if sys.n_sigma() > INFSUP_MAX_DOFS {
        return Err(Error::InvalidArgument(alloc::format!(
            "dense inf-sup estimate limited to {INFSUP_MAX_DOFS} stress unknowns, got {}",
            sys.n_sigma()
        )));
    }
    let dm = |a: &CsrMatrix| {
        let mut d = DMatrix::zeros(a.nrows(), a.ncols());
        for (r, c, v) in a.triplets() {
            d[(r, c)] = v;
        }
        d
    };
    estimate_infsup_dense(&dm(&sys.m), &dm(&sys.b), &dm(&sys.disp_mass))
}

pub fn estimate_infsup_dense(m: &DMatrix<f64>, b: &DMatrix<f64>, mu: &DMatrix<f64>) -> Result<InfSup> {
    let mu_chol = mu.clone().cholesky().ok_or_else(|| Error::Eigen("displacement mass is not SPD".into()))?;
    let a = m + b.transpose() * mu_chol.solve(b);
    let a_chol = a.cholesky().ok_or_else(|| Error::Eigen("H(div div) Gram matrix is not SPD".into()))?;
    let s = b * a_chol.solve(&b.transpose());
    let s = (&s + s.transpose()) * 0.5;
    let (lambda_min, lambda_max) = dense::generalized_extreme_eigenvalues(s, mu.clone())?;
    if !(lambda_min > 1e-12 * lambda_max) {
        return Err(Error::RankDeficient { smallest: lambda_min });
    }
    Ok(InfSup { beta: libm::sqrt(lambda_min), lambda_min, lambda_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SaddleSystem {
        SaddleSystem {
            m: CsrMatrix::identity(2),
            b: CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]),
            load: vec![1.0],
            disp_mass: CsrMatrix::identity(1),
        }
    }

    #[test]
    fn hand_solved_system() {
        for method in [Method::Direct, Method::Krylov] {
            let sol = solve(&tiny(), &SolverOptions { method, ..Default::default() }).unwrap();
            assert!((sol.sigma[0] - 1.0).abs() < 1e-12 && sol.sigma[1].abs() < 1e-12);
            assert!((sol.u[0] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_load_gives_zero() {
        let mut s = tiny();
        s.load = vec![0.0];
        let sol = solve(&s, &SolverOptions::default()).unwrap();
        assert!(sol.sigma.iter().chain(&sol.u).all(|&v| v == 0.0));
    }

    #[test]
    fn zero_row_is_flagged() {
        let m = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let mu = DMatrix::identity(2, 2);
        assert!(matches!(estimate_infsup_dense(&m, &b, &mu), Err(Error::RankDeficient { .. })));
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let r = estimate_infsup_dense(&m, &b, &DMatrix::identity(1, 1)).unwrap();
        // A = I + e1 e1ᵀ, B A⁻¹ Bᵀ = 1/2
        assert!((r.lambda_min - 0.5).abs() < 1e-14);
    }
}
