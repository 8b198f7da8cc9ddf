//! Gram matrix of the eigenbasis and its sign-flip inverse.
//!
//! For a PT-symmetric system with signature `s` and `S = diag(s)`, the
//! inverse of `G_mn = <E_m|E_n>` is `S G S`: every entry `G_kl` is multiplied
//! by `s_k s_l`. Duals then follow from `G` without any factorization,
//! `|E^n> = s_n sum_m s_m G_mn |E_m>`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::biortho::BiorthonormalSystem;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, inverse, ComplexMatrix, ComplexVector};
use crate::pt::{ParityOperator, Signature};

const HERMITICITY_TOL: f64 = 1e-12;
const DEFINITENESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseRoute {
    Inversion,
    Signature,
}

/// `G` together with an optional, route-tagged inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct GramPair {
    pub gram: ComplexMatrix,
    pub inverse: Option<(InverseRoute, ComplexMatrix)>,
    pub signature_used: Option<Signature>,
    /// Smallest eigenvalue of `G`, recorded during validation.
    pub min_eigenvalue: f64,
}

impl GramPair {
    pub fn with_inverse_by_inversion(mut self) -> Result<Self> {
        self.inverse = Some((InverseRoute::Inversion, inverse(&self.gram)?));
        self.signature_used = None;
        Ok(self)
    }

    pub fn with_inverse_by_signature(mut self, s: &Signature) -> Result<Self> {
        self.inverse = Some((
            InverseRoute::Signature,
            inverse_via_signature(&self.gram, s)?,
        ));
        self.signature_used = Some(s.clone());
        Ok(self)
    }
}

/// Assembles `G_mn = <E_m|E_n>` and checks that it is Hermitian and
/// positive definite (smallest eigenvalue above `1e-12 * lambda_max`).
pub fn gram_matrix(sys: &BiorthonormalSystem) -> Result<GramPair> {
    let v = sys.states_matrix();
    let gram = v.adjoint().matmul(&v)?;
    let scale = gram.max_abs();
    let herm = gram.hermiticity_defect();
    if herm > HERMITICITY_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian(herm));
    }
    let spectrum = eigenvalues(&gram)?;
    let min_eigenvalue = spectrum.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let max_eigenvalue = spectrum
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = DEFINITENESS_TOL * max_eigenvalue;
    if min_eigenvalue.is_nan() || bound.is_nan() || min_eigenvalue <= bound {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    Ok(GramPair {
        gram,
        inverse: None,
        signature_used: None,
        min_eigenvalue,
    })
}

/// Matrix of dual overlaps `<E^m|E^n>`, which equals `G^{-1}` for any
/// bi-orthonormal pair.
pub fn dual_gram(sys: &BiorthonormalSystem) -> ComplexMatrix {
    let d = sys.duals_matrix();
    d.adjoint().matmul(&d).expect("square")
}

/// `S G S`, i.e. entries `s_k G_kl s_l`. Costs one pass over `G`.
pub fn inverse_via_signature(gram: &ComplexMatrix, s: &Signature) -> Result<ComplexMatrix> {
    if !gram.is_square() || gram.rows() != s.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Gram matrix with signature of length {}",
            gram.rows(),
            gram.cols(),
            s.len()
        )));
    }
    let mut out = gram.clone();
    for k in 0..gram.rows() {
        for l in 0..gram.cols() {
            if s.values[k] != s.values[l] {
                out[(k, l)] = -out[(k, l)];
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignatureTheoremCheck {
    /// `max_abs(S G S G - I)`.
    pub residual: f64,
    /// `max_n |G_nn - (G^{-1})_nn|` with `G^{-1}` from an LU solve; infinite
    /// if `G` is numerically singular.
    pub diagonal_gap: f64,
}

pub fn verify_signature_theorem(
    gram: &ComplexMatrix,
    s: &Signature,
) -> Result<SignatureTheoremCheck> {
    let flipped = inverse_via_signature(gram, s)?;
    let residual = flipped.matmul(gram)?.identity_defect();
    let diagonal_gap = match inverse(gram) {
        Ok(solved) => gram
            .diagonal()
            .iter()
            .zip(solved.diagonal())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    Ok(SignatureTheoremCheck {
        residual,
        diagonal_gap,
    })
}

/// Duals via an explicit inverse: `|E^n> = sum_m (G^{-1})_mn |E_m>`.
pub fn dual_via_inversion(
    states: &[ComplexVector],
    gram: &ComplexMatrix,
) -> Result<Vec<ComplexVector>> {
    let gram_inv = inverse(gram)?;
    combine(states, &gram_inv)
}

/// Duals without inversion: `|E^n> = s_n sum_m s_m G_mn |E_m>`.
pub fn dual_via_signature(
    states: &[ComplexVector],
    gram: &ComplexMatrix,
    s: &Signature,
) -> Result<Vec<ComplexVector>> {
    combine(states, &inverse_via_signature(gram, s)?)
}

/// Column `n` of the result is `sum_m coeffs[m][n] states[m]`.
fn combine(states: &[ComplexVector], coeffs: &ComplexMatrix) -> Result<Vec<ComplexVector>> {
    let v = ComplexMatrix::from_columns(states)?;
    Ok(v.matmul(coeffs)?.columns())
}

/// Largest per-vector 2-norm distance between two dual families.
pub fn max_vector_discrepancy(a: &[ComplexVector], b: &[ComplexVector]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.sub(y).norm())
        .fold(0.0, f64::max)
}

/// `max_abs(sum_n s_n |E_n><E_n| P - I)`.
///
/// With the PT phase convention `conj(|E_n>) = P|E_n>` this is the matrix
/// form of the indefinite completeness relation on the grid.
pub fn check_unconventional_completeness(
    sys: &BiorthonormalSystem,
    s: &Signature,
    p: &ParityOperator,
) -> Result<f64> {
    let v = sys.states_matrix();
    let sum = v.matmul(&s.as_matrix())?.matmul(&v.adjoint())?;
    Ok(sum.matmul(p.matrix())?.identity_defect())
}

/// `max_abs(S N - I)` for the unconjugated overlaps `N_nm = sum_x v_n(x) v_m(x)`.
pub fn check_indefinite_norms(
    sys: &BiorthonormalSystem,
    s: &Signature,
    _p: &ParityOperator,
) -> Result<f64> {
    let v = sys.states_matrix();
    let overlaps = v.transpose().matmul(&v)?;
    Ok(s.as_matrix().matmul(&overlaps)?.identity_defect())
}

/// The PT norms `(v_n, v_n)` themselves, for reports.
pub fn indefinite_norms(sys: &BiorthonormalSystem) -> Vec<Complex64> {
    sys.states.iter().map(|v| v.bilinear(v)).collect()
}
