//! Concrete PT-symmetric Hamiltonian/parity pairs.
//!
//! Every generator returns `H` with `P conj(H) P = H` holding bit-exactly,
//! and a permutation parity.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, eigendecompose_with, eigenvalues, ComplexMatrix, ComplexVector,
};
use crate::pt::{classify_spectrum, make_parity, ParityOperator, ParitySpec};

/// Draws allowed by [`random_unbroken_pt`] before giving up.
pub const DEFAULT_MAX_ATTEMPTS: usize = 64;
/// Eigenvector-matrix condition ceiling for ensemble instances.
pub const DEFAULT_MAX_CONDITION: f64 = 1e8;

/// Gain/loss scale `n^{-3/2}` used for unbroken ensembles: the smallest
/// level spacing between the two parity sectors shrinks roughly like that,
/// so most draws stay in the unbroken phase at every size.
pub fn ensemble_scale(n: usize) -> f64 {
    (n.max(1) as f64).powf(-1.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub hamiltonian: ComplexMatrix,
    pub parity: ParityOperator,
}

/// Serializable description of a model family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelSpec {
    TwoLevel {
        g: f64,
        b: f64,
    },
    LatticeChain {
        n: usize,
        gamma: f64,
        t: f64,
    },
    DiscretizedSchrodinger {
        n: usize,
        half_width: f64,
        epsilon: f64,
    },
    RandomPt {
        n: usize,
        seed: u64,
        scale: f64,
        #[serde(default)]
        unbroken_only: bool,
    },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::TwoLevel { .. } => 2,
            ModelSpec::LatticeChain { n, .. }
            | ModelSpec::DiscretizedSchrodinger { n, .. }
            | ModelSpec::RandomPt { n, .. } => n,
        }
    }

    pub fn build(&self) -> Result<Model> {
        match *self {
            ModelSpec::TwoLevel { g, b } => two_level(g, b),
            ModelSpec::LatticeChain { n, gamma, t } => lattice_chain(n, gamma, t),
            ModelSpec::DiscretizedSchrodinger {
                n,
                half_width,
                epsilon,
            } => discretized_schrodinger(n, half_width, epsilon),
            ModelSpec::RandomPt {
                n,
                seed,
                scale,
                unbroken_only,
            } => {
                if unbroken_only {
                    random_unbroken_pt(n, seed, scale, &EnsembleOptions::default())
                } else {
                    random_pt(n, seed, scale)
                }
            }
        }
    }
}

fn require_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {value}"
        )))
    }
}

/// `H = [[i g, b], [b, -i g]]` with `P` the exchange of the two levels.
///
/// Eigenvalues are `+-sqrt(b^2 - g^2)`: real for `b^2 > g^2`, a conjugate
/// pair for `b^2 < g^2`, and an exceptional point at `b^2 = g^2`.
pub fn two_level(g: f64, b: f64) -> Result<Model> {
    require_finite("g", g)?;
    require_finite("b", b)?;
    let hamiltonian = ComplexMatrix::from_rows(&[
        vec![Complex64::new(0.0, g), Complex64::new(b, 0.0)],
        vec![Complex64::new(b, 0.0), Complex64::new(0.0, -g)],
    ])?;
    Ok(Model {
        hamiltonian,
        parity: make_parity(ParitySpec::SwapPairs(2))?,
    })
}

/// Where the balanced gain and loss sit along a chain.
#[derive(Debug, Clone, PartialEq)]
pub enum GainLossProfile {
    /// Gain on the first site, loss on the last.
    Ends,
    /// `(k, w)`: gain `i gamma w` on site `k`, loss `-i gamma w` on its
    /// mirror `n - 1 - k`.
    Sites(Vec<(usize, f64)>),
}

/// Open tight-binding chain with uniform hopping `t` and gain/loss at the
/// two ends.
pub fn lattice_chain(n: usize, gamma: f64, t: f64) -> Result<Model> {
    lattice_chain_with_profile(n, gamma, t, &GainLossProfile::Ends)
}

pub fn lattice_chain_with_profile(
    n: usize,
    gamma: f64,
    t: f64,
    profile: &GainLossProfile,
) -> Result<Model> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "chain needs at least 2 sites, got {n}"
        )));
    }
    require_finite("gamma", gamma)?;
    require_finite("t", t)?;
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n - 1 {
        h[(i, i + 1)] = Complex64::new(t, 0.0);
        h[(i + 1, i)] = Complex64::new(t, 0.0);
    }
    let sites = match profile {
        GainLossProfile::Ends => vec![(0, 1.0)],
        GainLossProfile::Sites(s) => s.clone(),
    };
    for (k, w) in sites {
        require_finite("gain/loss weight", w)?;
        let mirror = n.checked_sub(k + 1).ok_or_else(|| {
            Error::InvalidParameter(format!("gain/loss site {k} outside a chain of {n} sites"))
        })?;
        if mirror == k {
            return Err(Error::InvalidParameter(format!(
                "site {k} is its own mirror and cannot carry gain or loss"
            )));
        }
        h[(k, k)] += Complex64::new(0.0, gamma * w);
        h[(mirror, mirror)] += Complex64::new(0.0, -gamma * w);
    }
    Ok(Model {
        hamiltonian: h,
        parity: make_parity(ParitySpec::GridReversal(n))?,
    })
}

/// Grid points `x_j = L (2j - (n - 1)) / (n - 1)`, exactly antisymmetric
/// under `j -> n - 1 - j`.
pub fn symmetric_grid(n: usize, half_width: f64) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(Error::InvalidGrid(format!(
            "need at least 8 grid points, got {n}"
        )));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "half-width must be positive, got {half_width}"
        )));
    }
    let m = (n - 1) as f64;
    Ok((0..n)
        .map(|j| half_width * (2.0 * j as f64 - m) / m)
        .collect())
}

/// `V(x) = x^2 (i x)^epsilon` on the principal branch.
pub fn complex_potential(x: f64, epsilon: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // for x > 0, (ix)^eps = x^eps e^{i pi eps / 2}; negative x is the mirror image
    let r = x.abs();
    let v = Complex64::from_polar(r.powf(2.0 + epsilon), FRAC_PI_2 * epsilon);
    if x > 0.0 {
        v
    } else {
        v.conj()
    }
}

/// `H = -d^2/dx^2 + x^2 (i x)^epsilon` by second-order central differences
/// on `[-L, L]` with Dirichlet ends; `P` reverses the grid.
pub fn discretized_schrodinger(n: usize, half_width: f64, epsilon: f64) -> Result<Model> {
    let grid = symmetric_grid(n, half_width)?;
    if !(epsilon.is_finite() && epsilon > -2.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be finite and > -2, got {epsilon}"
        )));
    }
    let h = 2.0 * half_width / (n - 1) as f64;
    let kinetic = 1.0 / (h * h);
    let mut m = ComplexMatrix::zeros(n, n);
    for (j, &x) in grid.iter().enumerate() {
        m[(j, j)] = Complex64::new(2.0 * kinetic, 0.0) + complex_potential(x, epsilon);
        if j + 1 < n {
            m[(j, j + 1)] = Complex64::new(-kinetic, 0.0);
            m[(j + 1, j)] = Complex64::new(-kinetic, 0.0);
        }
    }
    Ok(Model {
        hamiltonian: m,
        parity: make_parity(ParitySpec::GridReversal(n))?,
    })
}

/// Random complex-symmetric PT-symmetric matrix.
///
/// Draws `A = X + i scale Y` with `X`, `Y` standard normal scaled by
/// `1/sqrt(n)`, symmetrizes `A <- (A + A^T)/2` and returns
/// `H = (A + P conj(A) P)/2` with `P` the grid reversal. `scale` sets the
/// strength of the gain/loss part relative to the Hermitian part; the same
/// seed always yields the same bits.
pub fn random_pt(n: usize, seed: u64, scale: f64) -> Result<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pt_from(n, scale, &mut rng, true)
}

/// Like [`random_pt`] but without the transpose symmetrization: PT-symmetric
/// yet, in general, not pseudo-Hermitian with respect to `P`.
pub fn random_pt_general(n: usize, seed: u64, scale: f64) -> Result<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_pt_from(n, scale, &mut rng, false)
}

fn random_pt_from(n: usize, scale: f64, rng: &mut ChaCha8Rng, symmetric: bool) -> Result<Model> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "random model needs n >= 2, got {n}"
        )));
    }
    require_finite("scale", scale)?;
    let norm = 1.0 / (n as f64).sqrt();
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            a[(i, j)] = Complex64::new(x * norm, scale * y * norm);
        }
    }
    if symmetric {
        let at = a.transpose();
        a = a.add(&at)?.scale(Complex64::new(0.5, 0.0));
    }
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = (a[(i, j)] + a[(n - 1 - i, n - 1 - j)].conj()) * 0.5;
        }
    }
    Ok(Model {
        hamiltonian: h,
        parity: make_parity(ParitySpec::GridReversal(n))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub max_attempts: usize,
    pub max_condition: f64,
    pub tol_real: f64,
    pub tol_eig: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        let tol = Tolerances::default();
        Self {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            max_condition: DEFAULT_MAX_CONDITION,
            tol_real: tol.real,
            tol_eig: tol.eig,
        }
    }
}

/// [`random_pt`] restricted to instances with an entirely real spectrum and
/// eigenvector condition number at most `opts.max_condition`.
///
/// Rejected draws are replaced by the next draw from the same seeded stream.
pub fn random_unbroken_pt(
    n: usize,
    seed: u64,
    scale: f64,
    opts: &EnsembleOptions,
) -> Result<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..opts.max_attempts {
        let model = random_pt_from(n, scale, &mut rng, true)?;
        if is_acceptable(&model.hamiltonian, opts) {
            return Ok(model);
        }
    }
    Err(Error::EnsembleExhausted {
        attempts: opts.max_attempts,
    })
}

fn is_acceptable(h: &ComplexMatrix, opts: &EnsembleOptions) -> bool {
    let unbroken = eigenvalues(h)
        .ok()
        .and_then(|ev| classify_spectrum(&ev, opts.tol_real).ok())
        .is_some_and(|c| c.unbroken);
    if !unbroken {
        return false;
    }
    match eigendecompose_with(h, opts.tol_eig) {
        Ok(pairs) => {
            let vectors: Vec<ComplexVector> = pairs.into_iter().map(|p| p.vector).collect();
            ComplexMatrix::from_columns(&vectors)
                .map(|v| condition_number(&v) <= opts.max_condition)
                .unwrap_or(false)
        }
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;
    use crate::pt::check_pt_symmetry;

    fn assert_exact_pt(model: &Model) {
        assert_eq!(
            check_pt_symmetry(&model.hamiltonian, &model.parity).unwrap(),
            0.0
        );
        let p = model.parity.matrix();
        assert_eq!(p.matmul(p).unwrap(), ComplexMatrix::identity(p.rows()));
        assert_eq!(&p.adjoint(), p);
    }

    #[test]
    fn two_level_spectra() {
        let herm = two_level(0.0, 1.0).unwrap();
        let ev = eigenvalues(&herm.hamiltonian).unwrap();
        assert!((ev[0].re + 1.0).abs() < 1e-15 && (ev[1].re - 1.0).abs() < 1e-15);

        let r3 = 3f64.sqrt();
        let unbroken = eigenvalues(&two_level(1.0, 2.0).unwrap().hamiltonian).unwrap();
        assert!((unbroken[0] - Complex64::new(-r3, 0.0)).norm() < 1e-14);
        let broken = eigenvalues(&two_level(2.0, 1.0).unwrap().hamiltonian).unwrap();
        assert!((broken[0].im.abs() - r3).abs() < 1e-14 && broken[0].re.abs() < 1e-14);
        assert!(two_level(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn two_level_broken_region_matches_closed_form() {
        let tol = Tolerances::default();
        for i in 0..21 {
            for j in 0..21 {
                let g = -2.0 + 0.2 * i as f64;
                let b = -2.0 + 0.2 * j as f64;
                let gap = b * b - g * g;
                if gap.abs() < 1e-9 {
                    continue; // exceptional line
                }
                let model = two_level(g, b).unwrap();
                assert_exact_pt(&model);
                let ev = eigenvalues(&model.hamiltonian).unwrap();
                let class = classify_spectrum(&ev, tol.real).unwrap();
                assert_eq!(class.unbroken, gap > 0.0, "g={g} b={b}");
            }
        }
    }

    #[test]
    fn chain_reduces_to_two_level() {
        let chain = lattice_chain(2, 0.7, 1.3).unwrap();
        let tl = two_level(0.7, 1.3).unwrap();
        assert_eq!(chain.hamiltonian, tl.hamiltonian);
        assert_eq!(chain.parity.matrix(), tl.parity.matrix());
    }

    #[test]
    fn chain_hermitian_limit_and_profiles() {
        let chain = lattice_chain(16, 0.0, 1.0).unwrap();
        assert_exact_pt(&chain);
        assert_eq!(chain.hamiltonian.hermiticity_defect(), 0.0);

        let profile = GainLossProfile::Sites(vec![(1, 1.0), (3, 0.5)]);
        let shaped = lattice_chain_with_profile(9, 0.2, 1.0, &profile).unwrap();
        assert_exact_pt(&shaped);
        assert_eq!(shaped.hamiltonian[(7, 7)], Complex64::new(0.0, -0.2));
        assert_eq!(shaped.hamiltonian[(5, 5)], Complex64::new(0.0, -0.1));

        let middle = GainLossProfile::Sites(vec![(4, 1.0)]);
        assert!(lattice_chain_with_profile(9, 0.2, 1.0, &middle).is_err());
        assert!(lattice_chain(1, 0.1, 1.0).is_err());
    }

    #[test]
    fn chain_breaks_as_gamma_grows() {
        let tol = Tolerances::default();
        let mut threshold = None;
        for step in 1..=200 {
            let gamma = 0.01 * step as f64;
            let model = lattice_chain(16, gamma, 1.0).unwrap();
            assert_exact_pt(&model);
            let ev = eigenvalues(&model.hamiltonian).unwrap();
            let broken = classify_spectrum(&ev, tol.real)
                .map(|c| !c.unbroken)
                .unwrap_or(true);
            if broken {
                threshold = Some(gamma);
                break;
            }
        }
        let threshold = threshold.expect("chain should leave the unbroken phase below gamma = 2");
        assert!(threshold > 0.01);
    }

    #[test]
    fn schrodinger_grid_and_symmetry() {
        let grid = symmetric_grid(11, 3.0).unwrap();
        for j in 0..11 {
            assert_eq!(grid[j], -grid[10 - j]);
        }
        assert_eq!(grid[5], 0.0);
        for eps in [0.0, 0.5, 1.0, 1.7] {
            for n in [8, 33, 64] {
                assert_exact_pt(&discretized_schrodinger(n, 5.0, eps).unwrap());
            }
        }
        assert!(matches!(symmetric_grid(7, 1.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(
            discretized_schrodinger(16, -1.0, 1.0),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn schrodinger_hermitian_case_has_positive_spectrum() {
        let model = discretized_schrodinger(200, 8.0, 0.0).unwrap();
        assert_eq!(model.hamiltonian.hermiticity_defect(), 0.0);
        let ev = eigenvalues(&model.hamiltonian).unwrap();
        assert!(ev.iter().all(|e| e.re > 0.0 && e.im.abs() < 1e-9));
        // oscillator levels 1, 3, 5 up to discretization error
        for (k, e) in ev.iter().take(3).enumerate() {
            assert!((e.re - (2 * k + 1) as f64).abs() < 0.02, "level {k}: {e}");
        }
    }

    #[test]
    fn cubic_potential_values() {
        let v = complex_potential(2.0, 1.0);
        assert!((v - Complex64::new(0.0, 8.0)).norm() < 1e-14);
        assert_eq!(complex_potential(-2.0, 1.0), v.conj());
        assert_eq!(complex_potential(0.0, 1.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn random_models_are_deterministic_and_pt() {
        let a = random_pt(12, 42, 0.3).unwrap();
        let b = random_pt(12, 42, 0.3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_pt(12, 43, 0.3).unwrap());
        assert_exact_pt(&a);
        assert_eq!(a.hamiltonian, a.hamiltonian.transpose());

        let general = random_pt_general(12, 42, 0.3).unwrap();
        assert_exact_pt(&general);
        assert_ne!(general.hamiltonian, general.hamiltonian.transpose());

        let small = random_pt(2, 5, 1.0).unwrap();
        assert_exact_pt(&small);
        assert_eq!(small.hamiltonian[(0, 1)], small.hamiltonian[(1, 0)]);
        assert_eq!(small.hamiltonian[(0, 0)], small.hamiltonian[(1, 1)].conj());
    }

    #[test]
    fn unbroken_ensemble_draws_and_exhaustion() {
        let model =
            random_unbroken_pt(16, 1, ensemble_scale(16), &EnsembleOptions::default()).unwrap();
        let ev = eigenvalues(&model.hamiltonian).unwrap();
        assert!(classify_spectrum(&ev, 1e-8).unwrap().unbroken);

        let opts = EnsembleOptions {
            max_attempts: 3,
            ..EnsembleOptions::default()
        };
        assert_eq!(
            random_unbroken_pt(40, 1, 50.0, &opts),
            Err(Error::EnsembleExhausted { attempts: 3 })
        );
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = ModelSpec::RandomPt {
            n: 8,
            seed: 42,
            scale: 0.25,
            unbroken_only: false,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"family\":\"random-pt\""));
        let back: ModelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(ModelSpec::TwoLevel { g: 1.0, b: 2.0 }.dim(), 2);
    }
}
