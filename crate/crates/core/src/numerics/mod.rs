//! Numerical kernels: polynomial calculus and dense symmetric linear algebra.

mod dense;
mod poly;

pub use dense::{
    eig_gsym, eig_gsym_smallest_positive, eigen_residual, solve_spd, Cholesky, EigenPairs,
    SymMatrix, EIG_RESIDUAL_TOL, SYMMETRY_TOL,
};
pub use poly::{integrate_product, sample_points, Polynomial};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (asymmetry {asymmetry:e} against scale {scale:e})")]
    NotSymmetric { asymmetry: f64, scale: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite: pivot {index} is {pivot:e}")]
    NonPositivePivot { index: usize, pivot: f64 },
    #[error("eigen-solve did not converge (scaled residual {residual:e})")]
    EigenNotConverged { residual: f64 },
}
