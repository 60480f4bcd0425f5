use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised anywhere in the numerical pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported quadrature degree {degree} (supported: {min}..={max})")]
    UnsupportedDegree { degree: usize, min: usize, max: usize },

    #[error("triangle {element} is degenerate or inverted (J = {jacobian:e})")]
    Degenerate { element: usize, jacobian: f64 },

    #[error("singular local system on element {element}: {what}")]
    SingularLocal { element: usize, what: &'static str },

    #[error("DOF Gram matrix on element {element} deviates from identity at ({row}, {col}) by {deviation:e}")]
    GramDeviation { element: usize, row: usize, col: usize, deviation: f64 },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize, history: Vec<f64> },

    #[error("saddle-point system is rank deficient (smallest generalized eigenvalue {smallest:e})")]
    RankDeficient { smallest: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("point ({x}, {y}) lies at a singularity of the expression")]
    Singular { x: f64, y: f64 },

    #[error("sym curl image is not single-valued: DOF {dof} mismatch {mismatch:e}")]
    Inconsistent { dof: usize, mismatch: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
