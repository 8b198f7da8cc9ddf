//! Dense complex linear algebra: matrices, eigendecomposition, linear solves,
//! singular values.

mod eigen;
mod matrix;
mod solve;
mod svd;

pub use eigen::{
    eigendecompose, eigendecompose_with, eigenvalues, order_eigenvalues, EigenPair, DEFAULT_TOL_EIG,
};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use solve::{inverse, solve, DEFAULT_TOL_SOLVE};
pub use svd::{condition_number, singular_values};

/// `(frobenius, max_abs)` of a matrix.
pub fn norms(m: &ComplexMatrix) -> (f64, f64) {
    (m.frobenius(), m.max_abs())
}
