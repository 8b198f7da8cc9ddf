use num_complex::Complex64;

use super::matrix::ComplexMatrix;

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order, by one-sided Jacobi rotations.
///
/// Accurate in the relative sense for the small singular values that decide
/// eigenvector-matrix conditioning, which squaring into `A^dagger A` is not.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut cols: Vec<Vec<Complex64>> = a.columns().into_iter().map(|c| c.into_vec()).collect();
    let n = cols.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = cols[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let yy = *y * phase;
                    let xi = *x;
                    *x = xi * c - yy * s;
                    *y = xi * s + yy * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number; infinite for rank-deficient input.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let sv = singular_values(a);
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
