//! Timing of the two dual constructions on random unbroken instances.

use std::time::Instant;

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gram::{dual_via_inversion, dual_via_signature, gram_matrix, max_vector_discrepancy};
use crate::io::sig17;
use crate::models::{ensemble_scale, random_unbroken_pt, EnsembleOptions};
use crate::verify::signed_basis;

pub const BENCH_SCHEMA: &str = "ptgram-bench/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dim: usize,
    /// Median seconds for duals via an explicit inverse of `G`.
    pub t_inv: f64,
    /// Median seconds for duals via the signature sign flip.
    pub t_sig: f64,
    /// `t_inv / t_sig`.
    pub speedup: f64,
    /// Largest per-vector 2-norm distance between the two dual families.
    #[serde(serialize_with = "sig17")]
    pub discrepancy: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// One row per dimension; instance `dim` is drawn with seed `seed + dim`.
///
/// Zero repetitions give an empty table.
pub fn bench_dual_routes(dims: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidParameter(format!(
            "benchmark dimension {d} is below 2"
        )));
    }
    if reps == 0 {
        return Ok(Vec::new());
    }
    let tol = Tolerances::default();
    let opts = EnsembleOptions::default();
    let mut rows = Vec::with_capacity(dims.len());
    for &dim in dims {
        let model = random_unbroken_pt(
            dim,
            seed.wrapping_add(dim as u64),
            ensemble_scale(dim),
            &opts,
        )?;
        let (sys, s) = signed_basis(&model.hamiltonian, &model.parity, &tol)?;
        let g = gram_matrix(&sys)?.gram;

        let mut t_inv = Vec::with_capacity(reps);
        let mut t_sig = Vec::with_capacity(reps);
        let mut by_inversion = Vec::new();
        let mut by_signature = Vec::new();
        for _ in 0..reps {
            let start = Instant::now();
            by_inversion = dual_via_inversion(&sys.states, &g)?;
            t_inv.push(start.elapsed().as_secs_f64());
            let start = Instant::now();
            by_signature = dual_via_signature(&sys.states, &g, &s)?;
            t_sig.push(start.elapsed().as_secs_f64());
        }
        let (t_inv, t_sig) = (median(t_inv), median(t_sig));
        rows.push(BenchRow {
            dim,
            t_inv,
            t_sig,
            speedup: if t_sig > 0.0 {
                t_inv / t_sig
            } else {
                f64::INFINITY
            },
            discrepancy: max_vector_discrepancy(&by_signature, &by_inversion),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_dimension_agrees() {
        let rows = bench_dual_routes(&[2, 5], 3, 7).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.discrepancy < 1e-10), "{rows:?}");
    }

    #[test]
    fn zero_repetitions_is_empty() {
        assert!(bench_dual_routes(&[64], 0, 1).unwrap().is_empty());
    }

    #[test]
    fn dimension_one_is_rejected() {
        assert!(bench_dual_routes(&[1], 5, 1).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
