//! Bi-orthonormal dual bases of a diagonalizable matrix.
//!
//! Right eigenvectors of `H` are matched to eigenvectors of `H^dagger` whose
//! eigenvalues are the complex conjugates, then the duals are rescaled (or,
//! inside a degenerate cluster, recombined) until `<E^n|E_m> = delta_nm`.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, eigendecompose_with, inverse, order_eigenvalues, singular_values,
    ComplexMatrix, ComplexVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriple {
    /// `E_n`, eigenvalue of `H`.
    pub value: Complex64,
    /// Eigenvalue of `H^dagger` matched to `conj(E_n)`.
    pub left_value: Complex64,
    pub right: ComplexVector,
    pub left: ComplexVector,
}

/// Matched right/left eigen-triples before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub dim: usize,
    pub triples: Vec<EigenTriple>,
    /// `|left_value - conj(value)|` per triple.
    pub pairing_residuals: Vec<f64>,
}

/// Normalized dual pair of bases `{|E_n>}`, `{|E^n>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthonormalSystem {
    pub dim: usize,
    pub eigenvalues: Vec<Complex64>,
    pub states: Vec<ComplexVector>,
    pub duals: Vec<ComplexVector>,
    /// `max_abs(<E^n|E_m> - delta_nm)`.
    pub duality_defect: f64,
    /// `max_abs(sum_n |E_n><E^n| - I)`.
    pub completeness_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalDiagnostics {
    /// 2-norm condition number of the unit-column right-eigenvector matrix.
    pub eigvec_condition: f64,
    /// Smallest pairwise eigenvalue distance; infinite for dimension 1.
    pub min_eigen_gap: f64,
}

/// Eigendecomposes `H` and `H^dagger` and pairs each `E_n` with the left
/// eigenvalue closest to `conj(E_n)`.
///
/// Pairing is greedy over the sorted list of all bipartite distances, each
/// left pair used once. A right eigenvalue with more left candidates inside
/// `tol.pair` than members of its own degenerate cluster (`tol.dup`) cannot
/// be matched reliably and yields [`Error::AmbiguousPairing`].
pub fn pair_left_right(h: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    let right = eigendecompose_with(h, tol.eig)?;
    let left = eigendecompose_with(&h.adjoint(), tol.eig)?;
    let n = right.len();

    for (i, r) in right.iter().enumerate() {
        let target = r.value.conj();
        let candidates = left
            .iter()
            .filter(|l| (l.value - target).norm() <= tol.pair)
            .count();
        let cluster = right
            .iter()
            .filter(|o| (o.value - r.value).norm() <= tol.dup)
            .count();
        if candidates >= 2 && candidates > cluster {
            return Err(Error::AmbiguousPairing {
                index: i,
                candidates,
                tol: tol.pair,
            });
        }
    }

    let mut distances: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, r) in right.iter().enumerate() {
        for (j, l) in left.iter().enumerate() {
            distances.push(((l.value - r.value.conj()).norm(), i, j));
        }
    }
    distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut match_of = vec![usize::MAX; n];
    let mut left_used = vec![false; n];
    let mut assigned = 0;
    for (_, i, j) in distances {
        if match_of[i] == usize::MAX && !left_used[j] {
            match_of[i] = j;
            left_used[j] = true;
            assigned += 1;
            if assigned == n {
                break;
            }
        }
    }

    let mut triples = Vec::with_capacity(n);
    let mut pairing_residuals = Vec::with_capacity(n);
    for (i, r) in right.into_iter().enumerate() {
        let l = &left[match_of[i]];
        pairing_residuals.push((l.value - r.value.conj()).norm());
        triples.push(EigenTriple {
            value: r.value,
            left_value: l.value,
            right: r.vector,
            left: l.vector.clone(),
        });
    }
    Ok(EigenSystem {
        dim: n,
        triples,
        pairing_residuals,
    })
}

/// Rescales duals so that `<E^n|E_m> = delta_nm`.
///
/// States keep unit 2-norm and the duals carry the whole scale factor.
/// Eigenvalues closer than `tol.dup` are grouped (transitively) into
/// clusters whose duals are recombined through the cluster-local overlap
/// system. A cluster overlap block with smallest singular value below
/// `tol.defect` means the input is not diagonalizable to working precision.
pub fn biorthonormalize(sys: &EigenSystem, tol: &Tolerances) -> Result<BiorthonormalSystem> {
    let mut order: Vec<usize> = (0..sys.triples.len()).collect();
    order.sort_by(|&a, &b| order_eigenvalues(&sys.triples[a].value, &sys.triples[b].value));
    let triples: Vec<&EigenTriple> = order.iter().map(|&k| &sys.triples[k]).collect();
    let n = triples.len();

    let mut duals: Vec<ComplexVector> = vec![ComplexVector::zeros(sys.dim); n];
    for cluster in clusters(&triples, tol.dup) {
        let k = cluster.len();
        let mut overlap = ComplexMatrix::zeros(k, k);
        for (a, &i) in cluster.iter().enumerate() {
            for (b, &j) in cluster.iter().enumerate() {
                overlap[(a, b)] = triples[i].left.inner(&triples[j].right);
            }
        }
        let rcond = *singular_values(&overlap).last().expect("non-empty cluster");
        if rcond < tol.defect {
            return Err(Error::DefectiveMatrix { cluster, rcond });
        }
        // d_b = sum_a u_a X_ab with X = (O^-1)^dagger gives <d_b|v_c> = delta_bc.
        let mix = inverse(&overlap)
            .map_err(|_| Error::DefectiveMatrix {
                cluster: cluster.clone(),
                rcond,
            })?
            .adjoint();
        for (b, &j) in cluster.iter().enumerate() {
            let mut d = ComplexVector::zeros(sys.dim);
            for (a, &i) in cluster.iter().enumerate() {
                let coeff = mix[(a, b)];
                for (dst, &src) in d.as_mut_slice().iter_mut().zip(triples[i].left.as_slice()) {
                    *dst += coeff * src;
                }
            }
            duals[j] = d;
        }
    }

    let states: Vec<ComplexVector> = triples.iter().map(|t| t.right.clone()).collect();
    let eigenvalues = triples.iter().map(|t| t.value).collect();
    BiorthonormalSystem::from_parts(eigenvalues, states, duals)
}

/// Single-linkage clusters of eigenvalues closer than `tol_dup`.
fn clusters(triples: &[&EigenTriple], tol_dup: f64) -> Vec<Vec<usize>> {
    let n = triples.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (triples[i].value - triples[j].value).norm() < tol_dup {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

impl BiorthonormalSystem {
    /// Assembles a system and measures its duality and completeness defects.
    pub fn from_parts(
        eigenvalues: Vec<Complex64>,
        states: Vec<ComplexVector>,
        duals: Vec<ComplexVector>,
    ) -> Result<Self> {
        if states.len() != duals.len() || states.len() != eigenvalues.len() || states.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues, {} states, {} duals",
                eigenvalues.len(),
                states.len(),
                duals.len()
            )));
        }
        let dim = states[0].dim();
        let v = ComplexMatrix::from_columns(&states)?;
        let d = ComplexMatrix::from_columns(&duals)?;
        let duality_defect = d.adjoint().matmul(&v)?.identity_defect();
        let completeness_defect = v.matmul(&d.adjoint())?.identity_defect();
        Ok(Self {
            dim,
            eigenvalues,
            states,
            duals,
            duality_defect,
            completeness_defect,
        })
    }

    /// Matrix with the states `|E_n>` as columns.
    pub fn states_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.states).expect("validated at construction")
    }

    /// Matrix with the duals `|E^n>` as columns.
    pub fn duals_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(&self.duals).expect("validated at construction")
    }

    /// Spectral resolution `sum_n E_n |E_n><E^n|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.states_matrix();
        let d = self.duals_matrix();
        let lambda = ComplexMatrix::from_diagonal(&self.eigenvalues);
        v.matmul(&lambda)
            .and_then(|vl| vl.matmul(&d.adjoint()))
            .expect("square factors")
    }
}

/// Defects of both resolutions of unity:
/// `(max_abs(sum |E^n><E_n| - I), max_abs(sum |E_n><E^n| - I))`.
pub fn check_completeness(sys: &BiorthonormalSystem) -> (f64, f64) {
    let v = sys.states_matrix();
    let d = sys.duals_matrix();
    let right_left = d.matmul(&v.adjoint()).expect("square").identity_defect();
    let left_right = v.matmul(&d.adjoint()).expect("square").identity_defect();
    (right_left, left_right)
}

pub fn diagnose_exceptional(sys: &EigenSystem) -> ExceptionalDiagnostics {
    let values: Vec<Complex64> = sys.triples.iter().map(|t| t.value).collect();
    let vectors: Vec<ComplexVector> = sys.triples.iter().map(|t| t.right.clone()).collect();
    diagnose_eigenbasis(&values, &vectors)
}

/// Conditioning of an arbitrary eigenbasis; columns are normalized first.
pub fn diagnose_eigenbasis(
    values: &[Complex64],
    vectors: &[ComplexVector],
) -> ExceptionalDiagnostics {
    let unit: Vec<ComplexVector> = vectors.iter().map(ComplexVector::normalized).collect();
    let eigvec_condition = ComplexMatrix::from_columns(&unit)
        .map(|v| condition_number(&v))
        .unwrap_or(f64::INFINITY);
    let mut min_eigen_gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            min_eigen_gap = min_eigen_gap.min((values[i] - values[j]).norm());
        }
    }
    ExceptionalDiagnostics {
        eigvec_condition,
        min_eigen_gap,
    }
}
