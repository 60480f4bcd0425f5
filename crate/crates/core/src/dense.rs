//! Small dense linear algebra on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Inverse via partial-pivot LU; `None` if the matrix is numerically singular.
pub fn try_inverse(a: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let scale = a.amax();
    if scale == 0.0 {
        return None;
    }
    let lu = a.lu();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min_pivot <= 1e-13 * scale {
        return None;
    }
    lu.try_inverse()
}

pub fn solve(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(b)
}

/// Numerical rank by column-pivoted QR: the number of `|R_ii|` above
/// `rel_tol` times the largest one.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > rel_tol * max).count()
}

/// Smallest and largest eigenvalue of the symmetric pencil `S x = λ M x` with
/// `M` symmetric positive definite.
pub fn generalized_extreme_eigenvalues(s: DMatrix<f64>, m: DMatrix<f64>) -> Result<(f64, f64)> {
    let chol = m.cholesky().ok_or_else(|| Error::Eigen("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    // L⁻¹ S L⁻ᵀ
    let y = l.solve_lower_triangular(&s).ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = l.solve_lower_triangular(&y.transpose()).ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(c, 1e-14, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_outer_product() {
        let u = DVector::from_vec(alloc::vec![1.0, 2.0, 3.0]);
        let a = &u * u.transpose();
        assert_eq!(rank(&a, 1e-8), 1);
        assert_eq!(rank(&DMatrix::identity(4, 4), 1e-8), 4);
        let wide = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 2.0, 0.0, 2.0]);
        assert_eq!(rank(&wide, 1e-8), 1);
        assert_eq!(rank(&wide.transpose(), 1e-8), 1);
    }

    #[test]
    fn singular_inverse_is_none() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(try_inverse(a).is_none());
    }

    #[test]
    fn generalized_eigenvalues_of_diagonal_pencil() {
        let s = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![2.0, 6.0]));
        let m = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![1.0, 2.0]));
        let (lo, hi) = generalized_extreme_eigenvalues(s, m).unwrap();
        assert!((lo - 2.0).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
    }
}
