use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Default relative residual target for [`solve`].
pub const DEFAULT_TOL_SOLVE: f64 = 1e-12;

/// Solves `A X = B` by LU factorization with partial pivoting.
///
/// A pivot whose modulus falls below `n * eps * max_abs(A)` is treated as
/// exact singularity.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve needs a square system matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, system has {}",
            b.rows(),
            a.rows()
        )));
    }
    let n = a.rows();
    let threshold = n as f64 * f64::EPSILON * a.max_abs();
    let mut lu = a.to_rows();
    let mut x = b.to_rows();

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[i][k].norm()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pivot <= threshold {
            return Err(Error::SingularMatrix {
                column: k,
                pivot,
                threshold,
            });
        }
        lu.swap(k, p);
        x.swap(k, p);
        let inv = Complex64::new(1.0, 0.0) / lu[k][k];
        for i in k + 1..n {
            let f = lu[i][k] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (upper, lower) = lu.split_at_mut(i);
            for (dst, &src) in lower[0][k..].iter_mut().zip(&upper[k][k..]) {
                *dst -= f * src;
            }
            let (upper, lower) = x.split_at_mut(i);
            for (dst, &src) in lower[0].iter_mut().zip(&upper[k]) {
                *dst -= f * src;
            }
        }
    }

    for k in (0..n).rev() {
        let (head, tail) = x.split_at_mut(k + 1);
        for (j, xkj) in head[k].iter_mut().enumerate() {
            let s: Complex64 = tail
                .iter()
                .zip(&lu[k][k + 1..])
                .map(|(row, &l)| l * row[j])
                .sum();
            *xkj = (*xkj - s) / lu[k][k];
        }
    }
    ComplexMatrix::from_rows(&x)
}

/// `A^{-1}` via [`solve`] against the identity.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(a, &ComplexMatrix::identity(a.rows()))
}
