//! Dense complex eigendecomposition.
//!
//! Householder reduction to upper Hessenberg form, single-shift complex QR
//! iteration to Schur form `M = Z T Z^dagger`, and back-substitution on the
//! triangular factor for the eigenvectors.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// Default relative residual bound `|M v - lambda v| <= tol |M|_F |v|`.
pub const DEFAULT_TOL_EIG: f64 = 1e-10;

/// QR sweeps allowed per deflated eigenvalue.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 120;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm, largest-modulus component real and positive.
    pub vector: ComplexVector,
}

/// Eigenpairs of a square matrix sorted by `(Re, Im)` ascending.
pub fn eigendecompose(m: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    eigendecompose_with(m, DEFAULT_TOL_EIG)
}

pub fn eigendecompose_with(m: &ComplexMatrix, tol_eig: f64) -> Result<Vec<EigenPair>> {
    require_square(m)?;
    let n = m.rows();
    let mut h = Work::from_matrix(m);
    let mut z = Work::identity(n);
    reduce_to_hessenberg(&mut h, Some(&mut z));
    schur_iterate(&mut h, Some(&mut z), true)?;

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let x = triangular_eigenvector(&h, k);
            let mut v = vec![ZERO; n];
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = (0..=k).map(|j| z.get(i, j) * x[j]).sum();
            }
            EigenPair {
                value: h.get(k, k),
                vector: fix_gauge(ComplexVector::from(v)),
            }
        })
        .collect();

    let scale = m.frobenius();
    for (k, p) in pairs.iter().enumerate() {
        let mv = m.mul_vec(&p.vector)?;
        let residual = mv.sub(&p.vector.scale(p.value)).norm();
        if residual > tol_eig * scale * p.vector.norm() {
            return Err(Error::NonConvergence(format!(
                "eigenpair {k} residual {residual:.3e} exceeds {:.3e}",
                tol_eig * scale
            )));
        }
    }

    pairs.sort_by(|a, b| order_eigenvalues(&a.value, &b.value));
    Ok(pairs)
}

/// Eigenvalues only, sorted by `(Re, Im)` ascending. Skips the Schur vectors.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    require_square(m)?;
    let mut h = Work::from_matrix(m);
    reduce_to_hessenberg(&mut h, None);
    schur_iterate(&mut h, None, false)?;
    let mut values: Vec<Complex64> = (0..h.n).map(|k| h.get(k, k)).collect();
    values.sort_by(order_eigenvalues);
    Ok(values)
}

pub fn order_eigenvalues(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn require_square(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Square scratch matrix, row-major.
struct Work {
    n: usize,
    a: Vec<Complex64>,
}

impl Work {
    fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            n: m.rows(),
            a: m.as_slice().to_vec(),
        }
    }

    fn identity(n: usize) -> Self {
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, a }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }

    fn max_abs(&self) -> f64 {
        self.a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Applies `G = [[c, s], [-conj(s), c]]` to rows `(p, p + 1)` over columns `cols`.
    fn rotate_rows(
        &mut self,
        p: usize,
        c: f64,
        s: Complex64,
        cols: std::ops::RangeInclusive<usize>,
    ) {
        let n = self.n;
        for col in cols {
            let x = self.a[p * n + col];
            let y = self.a[(p + 1) * n + col];
            self.a[p * n + col] = x * c + s * y;
            self.a[(p + 1) * n + col] = -s.conj() * x + y * c;
        }
    }

    /// Multiplies columns `(p, p + 1)` by `G^dagger` from the right over `rows`.
    fn rotate_cols(
        &mut self,
        p: usize,
        c: f64,
        s: Complex64,
        rows: std::ops::RangeInclusive<usize>,
    ) {
        let n = self.n;
        for row in rows {
            let x = self.a[row * n + p];
            let y = self.a[row * n + p + 1];
            self.a[row * n + p] = x * c + y * s.conj();
            self.a[row * n + p + 1] = -x * s + y * c;
        }
    }
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

fn reduce_to_hessenberg(h: &mut Work, mut z: Option<&mut Work>) {
    let n = h.n;
    for k in 0..n.saturating_sub(2) {
        let tail_norm: f64 = (k + 2..n).map(|i| h.get(i, k).norm_sqr()).sum::<f64>();
        if tail_norm == 0.0 {
            continue;
        }
        let x0 = h.get(k + 1, k);
        let norm = (tail_norm + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm2;

        // left: (I - tau v v^dagger) H
        for col in k..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h.get(k + 1 + i, col))
                .sum::<Complex64>()
                * tau;
            for (i, vi) in v.iter().enumerate() {
                let cur = h.get(k + 1 + i, col);
                h.set(k + 1 + i, col, cur - vi * s);
            }
        }
        // right: H (I - tau v v^dagger), same for the accumulated basis
        let apply_right = |w: &mut Work| {
            for row in 0..n {
                let s: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, vi)| w.get(row, k + 1 + i) * vi)
                    .sum::<Complex64>()
                    * tau;
                for (i, vi) in v.iter().enumerate() {
                    let cur = w.get(row, k + 1 + i);
                    w.set(row, k + 1 + i, cur - s * vi.conj());
                }
            }
        };
        apply_right(h);
        if let Some(z) = z.as_deref_mut() {
            apply_right(z);
        }

        h.set(k + 1, k, alpha);
        for i in k + 2..n {
            h.set(i, k, ZERO);
        }
    }
}

/// Rotation `(c, s)` with `[[c, s], [-conj(s), c]] [a, b]^T = [r, 0]^T`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let norm = na.hypot(nb);
    (na / norm, (a / na) * b.conj() / norm)
}

/// Eigenvalue of the trailing 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let plus = p + disc;
    let minus = p - disc;
    let denom = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };
    if denom.norm() == 0.0 {
        d
    } else {
        d - bc / denom
    }
}

fn schur_iterate(h: &mut Work, mut z: Option<&mut Work>, full: bool) -> Result<()> {
    let n = h.n;
    if n == 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let safe_min = f64::MIN_POSITIVE * (n as f64 / eps);
    let scale = h.max_abs();
    let mut hi = n - 1;
    let mut sweeps = 0usize;

    while hi > 0 {
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let mut s = abs1(h.get(k - 1, k - 1)) + abs1(h.get(k, k));
            if s == 0.0 {
                s = scale;
            }
            if abs1(h.get(k, k - 1)) <= (eps * s).max(safe_min) {
                h.set(k, k - 1, ZERO);
                lo = k;
                break;
            }
        }
        if lo == hi {
            hi -= 1;
            sweeps = 0;
            continue;
        }

        sweeps += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::NonConvergence(format!(
                "no deflation at row {hi} after {MAX_SWEEPS_PER_EIGENVALUE} QR sweeps"
            )));
        }

        let shift = if sweeps % 20 == 10 {
            h.get(lo, lo) + 0.75 * h.get(lo + 1, lo).re.abs()
        } else if sweeps.is_multiple_of(20) {
            h.get(hi, hi) + 0.75 * h.get(hi, hi - 1).re.abs()
        } else {
            wilkinson_shift(
                h.get(hi - 1, hi - 1),
                h.get(hi - 1, hi),
                h.get(hi, hi - 1),
                h.get(hi, hi),
            )
        };

        let col_end = if full { n - 1 } else { hi };
        let row_start = if full { 0 } else { lo };
        for k in lo..hi {
            let (c, s) = if k == lo {
                givens(h.get(lo, lo) - shift, h.get(lo + 1, lo))
            } else {
                givens(h.get(k, k - 1), h.get(k + 1, k - 1))
            };
            let col_start = if k == lo { k } else { k - 1 };
            h.rotate_rows(k, c, s, col_start..=col_end);
            if k > lo {
                h.set(k + 1, k - 1, ZERO);
            }
            h.rotate_cols(k, c, s, row_start..=(k + 2).min(hi));
            if let Some(z) = z.as_deref_mut() {
                z.rotate_cols(k, c, s, 0..=n - 1);
            }
        }
    }
    Ok(())
}

/// Solves `(T - t_kk I) x = 0` with `x_k = 1` by back-substitution.
fn triangular_eigenvector(t: &Work, k: usize) -> Vec<Complex64> {
    let lambda = t.get(k, k);
    let small = (f64::EPSILON * t.max_abs()).max(f64::MIN_POSITIVE);
    let mut x = vec![ZERO; k + 1];
    x[k] = Complex64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let sum: Complex64 = (i + 1..=k).map(|j| t.get(i, j) * x[j]).sum();
        let mut d = t.get(i, i) - lambda;
        if d.norm() < small {
            d = Complex64::new(small, 0.0);
        }
        x[i] = -sum / d;
        let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 1e150 {
            for xi in x.iter_mut() {
                *xi /= big;
            }
        }
    }
    x
}

/// Unit norm with the first largest-modulus component made real positive.
fn fix_gauge(v: ComplexVector) -> ComplexVector {
    let v = v.normalized();
    let mut best = 0;
    let mut best_abs = 0.0;
    for (i, z) in v.as_slice().iter().enumerate() {
        if z.norm() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs == 0.0 {
        return v;
    }
    let phase = v[best].conj() / best_abs;
    v.scale(phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let data = (0..n * n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_vec(n, n, data).unwrap()
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let pairs = eigendecompose(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert_eq!(p.value, c(1.0, 0.0));
        }
    }

    #[test]
    fn diagonal_sorted_by_real_then_imag() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)]);
        let pairs = eigendecompose(&m).unwrap();
        let values: Vec<_> = pairs.iter().map(|p| p.value).collect();
        assert_eq!(values, vec![c(-3.0, 0.0), c(0.0, 2.0), c(1.0, 0.0)]);
        assert_eq!(pairs[0].vector, ComplexVector::basis(3, 2));
        assert_eq!(pairs[1].vector, ComplexVector::basis(3, 1));
        assert_eq!(pairs[2].vector, ComplexVector::basis(3, 0));
    }

    #[test]
    fn two_level_closed_form() {
        // lambda^2 = b^2 - g^2 with g = 1, b = 2
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        let values = eigenvalues(&m).unwrap();
        let r3 = 3f64.sqrt();
        assert!((values[0] - c(-r3, 0.0)).norm() < 1e-14);
        assert!((values[1] - c(r3, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn nilpotent_jordan_block_still_backward_stable() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 1.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        let pairs = eigendecompose(&m).unwrap();
        for p in pairs {
            assert!(p.value.norm() < 1e-7);
        }
    }

    #[test]
    fn zero_and_one_by_one() {
        let pairs = eigendecompose(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(pairs.iter().all(|p| p.value == ZERO));
        let one = ComplexMatrix::from_rows(&[vec![c(2.0, -1.0)]]).unwrap();
        assert_eq!(eigenvalues(&one).unwrap(), vec![c(2.0, -1.0)]);
        assert!(eigendecompose(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn random_matrices_meet_residual_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let n = 1 + trial % 32;
            let m = random_matrix(n, &mut rng);
            let pairs = eigendecompose(&m).unwrap();
            assert_eq!(pairs.len(), n);
            let scale = m.frobenius();
            for p in &pairs {
                assert!((p.vector.norm() - 1.0).abs() < 1e-12);
                let r = m
                    .mul_vec(&p.vector)
                    .unwrap()
                    .sub(&p.vector.scale(p.value))
                    .norm();
                assert!(r <= DEFAULT_TOL_EIG * scale, "trial {trial}: residual {r}");
            }
            for w in pairs.windows(2) {
                assert_ne!(
                    order_eigenvalues(&w[0].value, &w[1].value),
                    Ordering::Greater
                );
            }
        }
    }

    #[test]
    fn hermitian_spectrum_is_real_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=24 {
            let a = random_matrix(n, &mut rng);
            let h = a.add(&a.adjoint()).unwrap();
            let pairs = eigendecompose(&h).unwrap();
            let scale = h.frobenius();
            let min_gap = pairs
                .windows(2)
                .map(|w| (w[1].value - w[0].value).norm())
                .fold(f64::INFINITY, f64::min);
            for (i, p) in pairs.iter().enumerate() {
                assert!(p.value.im.abs() <= DEFAULT_TOL_EIG * scale);
                if min_gap > 1e-3 {
                    for q in &pairs[i + 1..] {
                        assert!(p.vector.inner(&q.vector).norm() < 10.0 * DEFAULT_TOL_EIG);
                    }
                }
            }
        }
    }
}
