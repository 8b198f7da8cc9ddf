//! Parity, time reversal and the PT signature.
//!
//! Time reversal is entrywise complex conjugation in the working basis, so
//! PT invariance of a matrix reads `P conj(H) P = H` and PT invariance of a
//! state reads `P conj(v) = v`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::biortho::BiorthonormalSystem;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};

const INVOLUTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityKind {
    /// Site `i` maps to `dim - 1 - i`.
    GridReversal,
    /// Sites `2k` and `2k + 1` exchanged; a trailing odd site is fixed.
    SwapPairs,
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParitySpec {
    GridReversal(usize),
    SwapPairs(usize),
    Explicit(ComplexMatrix),
}

/// A linear, self-adjoint involution.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityOperator {
    matrix: ComplexMatrix,
    kind: ParityKind,
}

impl ParityOperator {
    /// Validates `P^2 = I` and `P = P^dagger`, then labels the matrix with
    /// the first structured kind it matches exactly.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParity(format!(
                "parity must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let square = matrix.matmul(&matrix)?.identity_defect();
        if square > INVOLUTION_TOL {
            return Err(Error::InvalidParity(format!(
                "P^2 - I has max entry {square:.3e}"
            )));
        }
        let herm = matrix.hermiticity_defect();
        if herm > INVOLUTION_TOL {
            return Err(Error::InvalidParity(format!(
                "P - P^dagger has max entry {herm:.3e}"
            )));
        }
        let n = matrix.rows();
        let kind = if matrix == permutation(n, |i| n - 1 - i) {
            ParityKind::GridReversal
        } else if matrix == permutation(n, swap_partner(n)) {
            ParityKind::SwapPairs
        } else {
            ParityKind::Explicit
        };
        Ok(Self { matrix, kind })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> ParityKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// The identity is a valid but uninformative parity.
    pub fn is_trivial(&self) -> bool {
        self.matrix.identity_defect() == 0.0
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        self.matrix.mul_vec(v).expect("dimension checked by caller")
    }

    /// `P X P`.
    pub fn sandwich(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.matrix.matmul(x)?.matmul(&self.matrix)
    }
}

fn swap_partner(n: usize) -> impl Fn(usize) -> usize {
    move |i| {
        let j = i ^ 1;
        if j < n {
            j
        } else {
            i
        }
    }
}

fn permutation(n: usize, image: impl Fn(usize) -> usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        p[(image(i), i)] = Complex64::new(1.0, 0.0);
    }
    p
}

pub fn make_parity(spec: ParitySpec) -> Result<ParityOperator> {
    match spec {
        ParitySpec::GridReversal(0) | ParitySpec::SwapPairs(0) => {
            Err(Error::InvalidParity("dimension must be at least 1".into()))
        }
        ParitySpec::GridReversal(n) => ParityOperator::from_matrix(permutation(n, |i| n - 1 - i)),
        ParitySpec::SwapPairs(n) => ParityOperator::from_matrix(permutation(n, swap_partner(n))),
        ParitySpec::Explicit(m) => ParityOperator::from_matrix(m),
    }
}

fn require_same_dim(h: &ComplexMatrix, p: &ParityOperator) -> Result<()> {
    if !h.is_square() || h.rows() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Hamiltonian with parity of dimension {}",
            h.rows(),
            h.cols(),
            p.dim()
        )));
    }
    Ok(())
}

/// `max_abs(P conj(H) P - H)`; zero iff `H` commutes with PT.
pub fn check_pt_symmetry(h: &ComplexMatrix, p: &ParityOperator) -> Result<f64> {
    require_same_dim(h, p)?;
    Ok(p.sandwich(&h.conj())?.sub(h)?.max_abs())
}

/// `max_abs(P H P - H^dagger)`, i.e. pseudo-Hermiticity with metric `P`.
pub fn check_pseudo_hermiticity(h: &ComplexMatrix, p: &ParityOperator) -> Result<f64> {
    require_same_dim(h, p)?;
    Ok(p.sandwich(h)?.sub(&h.adjoint())?.max_abs())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumClassification {
    pub real_indices: Vec<usize>,
    pub conjugate_pairs: Vec<(usize, usize)>,
    /// True iff there are no conjugate pairs.
    pub unbroken: bool,
}

/// Splits a spectrum into real eigenvalues and complex-conjugate pairs.
///
/// `E` counts as real when `|Im E| <= tol_real (1 + |E|)`; the rest are
/// matched greedily by `|E_a - conj(E_b)|` under the same scaled tolerance.
pub fn classify_spectrum(
    eigenvalues: &[Complex64],
    tol_real: f64,
) -> Result<SpectrumClassification> {
    let scaled = |e: Complex64| tol_real * (1.0 + e.norm());
    let (real_indices, complex): (Vec<usize>, Vec<usize>) =
        (0..eigenvalues.len()).partition(|&i| eigenvalues[i].im.abs() <= scaled(eigenvalues[i]));

    let mut candidates = Vec::new();
    for (x, &a) in complex.iter().enumerate() {
        for &b in &complex[x + 1..] {
            let d = (eigenvalues[a] - eigenvalues[b].conj()).norm();
            if d <= scaled(eigenvalues[a]).max(scaled(eigenvalues[b])) {
                candidates.push((d, a, b));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut used = vec![false; eigenvalues.len()];
    let mut conjugate_pairs = Vec::new();
    for (_, a, b) in candidates {
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            conjugate_pairs.push((a, b));
        }
    }
    if let Some(&index) = complex.iter().find(|&&i| !used[i]) {
        return Err(Error::UnpairedComplexEigenvalue { index });
    }
    conjugate_pairs.sort_unstable();
    let unbroken = conjugate_pairs.is_empty();
    Ok(SpectrumClassification {
        real_indices,
        conjugate_pairs,
        unbroken,
    })
}

/// Per-state result of [`fix_pt_phase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFix {
    /// `alpha` in `P conj(v) = e^{i alpha} v`, principal branch.
    pub alpha: f64,
    /// `|P conj(v) - e^{i alpha} v| / |v|`.
    pub defect: f64,
}

/// Re-phases every state so that `P conj(|E_n>) = |E_n>`.
///
/// With `P conj(v) = e^{i alpha} v` the state becomes `e^{i alpha/2} v`; the
/// dual picks up the same factor, which keeps `<E^n|E_n> = 1`. The remaining
/// sign freedom `v -> -v` is fixed by making the first component of largest
/// `|Re|` positive (or, for a purely imaginary state, the first component of
/// largest `|Im|` positive imaginary).
pub fn fix_pt_phase(
    sys: &BiorthonormalSystem,
    p: &ParityOperator,
    tol_phase: f64,
) -> Result<(BiorthonormalSystem, Vec<PhaseFix>)> {
    if p.dim() != sys.dim {
        return Err(Error::DimensionMismatch(format!(
            "system of dimension {} with parity of dimension {}",
            sys.dim,
            p.dim()
        )));
    }
    let mut states = Vec::with_capacity(sys.dim);
    let mut duals = Vec::with_capacity(sys.dim);
    let mut fixes = Vec::with_capacity(sys.dim);
    for (index, (v, d)) in sys.states.iter().zip(&sys.duals).enumerate() {
        let w = p.apply(&v.conj());
        let vv = v.inner(v);
        let lambda = v.inner(&w) / vv;
        let defect = w.sub(&v.scale(lambda)).norm() / vv.re.sqrt();
        if defect.is_nan() || defect > tol_phase || lambda.norm() == 0.0 {
            return Err(Error::NotPtInvariant { index, defect });
        }
        let alpha = lambda.arg();
        let alpha = if alpha <= -PI { PI } else { alpha };
        let mut phase = Complex64::from_polar(1.0, alpha / 2.0);
        if gauge_sign(&v.scale(phase)) < 0.0 {
            phase = -phase;
        }
        states.push(v.scale(phase));
        duals.push(d.scale(phase));
        fixes.push(PhaseFix { alpha, defect });
    }
    Ok((
        BiorthonormalSystem::from_parts(sys.eigenvalues.clone(), states, duals)?,
        fixes,
    ))
}

fn gauge_sign(v: &ComplexVector) -> f64 {
    fn leading(values: impl Iterator<Item = f64> + Clone) -> f64 {
        let max = values.clone().fold(0.0f64, |m, x| m.max(x.abs()));
        if max == 0.0 {
            return 0.0;
        }
        values
            .into_iter()
            .find(|x| x.abs() >= max * (1.0 - 1e-8))
            .map_or(0.0, f64::signum)
    }
    let re = leading(v.as_slice().iter().map(|z| z.re));
    let max_re = v.as_slice().iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    if re != 0.0 && max_re > 1e-8 * v.norm() {
        re
    } else {
        leading(v.as_slice().iter().map(|z| z.im))
    }
}

/// Signs `s_n = +-1` linking each dual to its parity-reflected state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub values: Vec<i8>,
    /// `| |E^n> - s_n P|E_n> |_2` per state.
    pub residuals: Vec<f64>,
    pub valid: bool,
}

impl Signature {
    /// Builds a signature from exact signs with zero residuals.
    pub fn from_signs(values: Vec<i8>) -> Self {
        assert!(
            values.iter().all(|&s| s == 1 || s == -1),
            "signature entries must be +-1"
        );
        let residuals = vec![0.0; values.len()];
        Self {
            values,
            residuals,
            valid: true,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sign(&self, n: usize) -> f64 {
        f64::from(self.values[n])
    }

    pub fn is_mixed(&self) -> bool {
        self.values.contains(&1) && self.values.contains(&-1)
    }

    /// `S = diag(s)`.
    pub fn as_matrix(&self) -> ComplexMatrix {
        let diag: Vec<Complex64> = self
            .values
            .iter()
            .map(|&s| Complex64::new(f64::from(s), 0.0))
            .collect();
        ComplexMatrix::from_diagonal(&diag)
    }
}

/// Reads off `s_n = sign Re <E^n|P|E^n>` from a phase-fixed system.
///
/// Each `(state, dual)` pair is then rescaled by a common real factor
/// `r_n = |<E_n|P|E_n>|^{-1/2}` (state times `r_n`, dual divided by it), which
/// makes `|E^n> = s_n P|E_n>` hold as a vector identity without disturbing
/// `<E^n|E_m> = delta_nm`. Afterwards `<E_n|P|E_n> = s_n`.
pub fn extract_signature(
    sys: &BiorthonormalSystem,
    p: &ParityOperator,
    tol: &Tolerances,
) -> Result<(BiorthonormalSystem, Signature)> {
    let mut states = Vec::with_capacity(sys.dim);
    let mut duals = Vec::with_capacity(sys.dim);
    let mut values = Vec::with_capacity(sys.dim);
    let mut residuals = Vec::with_capacity(sys.dim);
    for (index, (v, d)) in sys.states.iter().zip(&sys.duals).enumerate() {
        let dual_norm = d.inner(&p.apply(d)).re;
        let state_norm = v.inner(&p.apply(v)).re;
        if dual_norm.abs() <= tol.sig * d.inner(d).re || state_norm.abs() <= tol.sig * v.inner(v).re
        {
            return Err(Error::SignatureUndefined {
                index,
                value: dual_norm,
            });
        }
        let s: i8 = if dual_norm > 0.0 { 1 } else { -1 };
        let r = 1.0 / state_norm.abs().sqrt();
        let state = v.scale(Complex64::new(r, 0.0));
        let dual = d.scale(Complex64::new(1.0 / r, 0.0));
        let residual = dual
            .sub(&p.apply(&state).scale(Complex64::new(f64::from(s), 0.0)))
            .norm();
        states.push(state);
        duals.push(dual);
        values.push(s);
        residuals.push(residual);
    }
    let valid = residuals.iter().all(|&r| r <= tol.sig);
    Ok((
        BiorthonormalSystem::from_parts(sys.eigenvalues.clone(), states, duals)?,
        Signature {
            values,
            residuals,
            valid,
        },
    ))
}

/// `C_s = sum_m s_m |E_m><E^m|`.
pub fn build_charge(sys: &BiorthonormalSystem, s: &Signature) -> Result<ComplexMatrix> {
    if s.len() != sys.dim {
        return Err(Error::DimensionMismatch(format!(
            "signature of length {} for a system of dimension {}",
            s.len(),
            sys.dim
        )));
    }
    sys.states_matrix()
        .matmul(&s.as_matrix())?
        .matmul(&sys.duals_matrix().adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeProperties {
    /// `max_abs(C_s^2 - I)`.
    pub square_defect: f64,
    /// `max_abs([C_s, H]) / max(1, max_abs(H))`.
    pub commutator: f64,
    /// `max_n | P C_s |E_n> - |E^n> |_2`.
    pub parity_map_defect: f64,
    /// `max_abs(C_s - C_s^dagger)`; generically nonzero.
    pub asymmetry: f64,
}

impl ChargeProperties {
    /// Largest of the three defects that must vanish.
    pub fn worst_defect(&self) -> f64 {
        self.square_defect
            .max(self.commutator)
            .max(self.parity_map_defect)
    }
}

pub fn charge_properties(
    charge: &ComplexMatrix,
    h: &ComplexMatrix,
    p: &ParityOperator,
    sys: &BiorthonormalSystem,
) -> Result<ChargeProperties> {
    let square_defect = charge.matmul(charge)?.identity_defect();
    let commutator = charge.matmul(h)?.sub(&h.matmul(charge)?)?.max_abs() / h.max_abs().max(1.0);
    let pc = p.matrix().matmul(charge)?;
    let parity_map_defect = sys
        .states
        .iter()
        .zip(&sys.duals)
        .map(|(v, d)| pc.mul_vec(v).map(|x| x.sub(d).norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let asymmetry = charge.sub(&charge.adjoint())?.max_abs();
    Ok(ChargeProperties {
        square_defect,
        commutator,
        parity_map_defect,
        asymmetry,
    })
}
