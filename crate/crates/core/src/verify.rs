//! The whole pipeline in one call: pairing, bi-orthonormalization, spectrum
//! classification, phase fixing, signature, Gram matrix and every relation
//! of the checklist, each with residual, tolerance and verdict.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::biortho::{
    biorthonormalize, check_completeness, diagnose_eigenbasis, diagnose_exceptional,
    pair_left_right, BiorthonormalSystem, ExceptionalDiagnostics,
};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gram::{
    check_indefinite_norms, check_unconventional_completeness, dual_gram, dual_via_inversion,
    dual_via_signature, gram_matrix, inverse_via_signature, max_vector_discrepancy,
    verify_signature_theorem,
};
use crate::io::{sig17, sig17_opt};
use crate::linalg::{eigendecompose_with, inverse, ComplexMatrix, ComplexVector};
use crate::pt::{
    build_charge, charge_properties, check_pseudo_hermiticity, check_pt_symmetry,
    classify_spectrum, extract_signature, fix_pt_phase, ParityKind, ParityOperator, Signature,
    SpectrumClassification,
};

pub const REPORT_SCHEMA: &str = "ptgram-report/1";

/// Fixed checklist of relations, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationId {
    /// Both resolutions of unity.
    Completeness,
    /// `<E^n|E_m> = delta_nm`.
    Duality,
    /// `|E^n> = s_n P|E_n>`.
    Signature,
    /// `C_s^2 = I`, `[C_s, H] = 0`, `P C_s |E_n> = |E^n>`.
    ChargeProperties,
    /// `sum_n s_n |E_n><E_n| P = I`.
    IndefiniteCompleteness,
    /// `s_n (v_n, v_m) = delta_nm` with the unconjugated product.
    IndefiniteNorms,
    /// `S G S G = I`.
    GramInverse,
    /// Inversion-free duals agree with inverted-Gram duals and with the
    /// eigenvectors of `H^dagger`.
    DualRoutes,
    /// `P conj(H) P = H`.
    PtCommutation,
    /// `P H P = H^dagger`.
    PseudoHermiticity,
    /// `G_nn = (G^{-1})_nn`.
    DiagonalEquality,
}

impl RelationId {
    pub const ALL: [RelationId; 11] = [
        RelationId::Completeness,
        RelationId::Duality,
        RelationId::Signature,
        RelationId::ChargeProperties,
        RelationId::IndefiniteCompleteness,
        RelationId::IndefiniteNorms,
        RelationId::GramInverse,
        RelationId::DualRoutes,
        RelationId::PtCommutation,
        RelationId::PseudoHermiticity,
        RelationId::DiagonalEquality,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelationId::Completeness => "completeness",
            RelationId::Duality => "duality",
            RelationId::Signature => "signature",
            RelationId::ChargeProperties => "charge-properties",
            RelationId::IndefiniteCompleteness => "indefinite-completeness",
            RelationId::IndefiniteNorms => "indefinite-norms",
            RelationId::GramInverse => "gram-inverse",
            RelationId::DualRoutes => "dual-routes",
            RelationId::PtCommutation => "pt-commutation",
            RelationId::PseudoHermiticity => "pseudo-hermiticity",
            RelationId::DiagonalEquality => "diagonal-equality",
        }
    }

    /// Relations that only make sense with a signature, i.e. in the
    /// unbroken phase.
    pub fn needs_signature(&self) -> bool {
        !matches!(
            self,
            RelationId::Completeness
                | RelationId::Duality
                | RelationId::PtCommutation
                | RelationId::PseudoHermiticity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    /// A stage it depends on failed.
    NotEvaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationEntry {
    pub id: RelationId,
    pub status: Status,
    #[serde(serialize_with = "sig17_opt")]
    pub residual: Option<f64>,
    #[serde(serialize_with = "sig17")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub stage: &'static str,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip)]
    pub numerical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(serialize_with = "sig17")]
    pub eigvec_condition: f64,
    #[serde(serialize_with = "sig17")]
    pub min_eigen_gap: f64,
    pub near_exceptional: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParityInfo {
    pub kind: ParityKind,
    pub trivial: bool,
}

/// Quantities recorded alongside the checklist.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Extras {
    /// `max_abs(C_s - C_s^dagger)`.
    #[serde(serialize_with = "sig17_opt")]
    pub charge_asymmetry: Option<f64>,
    /// `max_abs(dual_gram - solve(G, I))`.
    #[serde(serialize_with = "sig17_opt")]
    pub dual_gram_vs_solve: Option<f64>,
    /// Largest PT phase-fixing defect.
    #[serde(serialize_with = "sig17_opt")]
    pub phase_defect: Option<f64>,
    /// Largest `|left eigenvalue - conj(E_n)|`.
    #[serde(serialize_with = "sig17_opt")]
    pub pairing_residual: Option<f64>,
}

/// Matrices written by `analyze`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportDetails {
    pub hamiltonian: ComplexMatrix,
    pub parity: ComplexMatrix,
    pub gram: Option<ComplexMatrix>,
    pub gram_inverse: Option<ComplexMatrix>,
    pub states: Option<Vec<ComplexVector>>,
    pub duals: Option<Vec<ComplexVector>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub dim: usize,
    pub parity: ParityInfo,
    pub eigenvalues: Vec<Complex64>,
    pub classification: Option<SpectrumClassification>,
    pub signature: Option<Signature>,
    pub relations: Vec<RelationEntry>,
    pub diagnostics: Option<Diagnostics>,
    pub extras: Extras,
    pub stage_errors: Vec<StageError>,
    /// Wall-clock seconds per stage, in execution order.
    pub timings: Vec<(&'static str, f64)>,
    pub details: ReportDetails,
}

impl VerificationReport {
    pub fn relation(&self, id: RelationId) -> &RelationEntry {
        self.relations
            .iter()
            .find(|r| r.id == id)
            .expect("every checklist relation is present")
    }

    pub fn near_exceptional(&self) -> bool {
        self.diagnostics
            .as_ref()
            .is_some_and(|d| d.near_exceptional)
    }

    /// True iff every applicable relation passed, no stage failed and the
    /// eigenbasis is not flagged as near an exceptional point.
    pub fn all_applicable_pass(&self) -> bool {
        self.stage_errors.is_empty()
            && !self.near_exceptional()
            && self
                .relations
                .iter()
                .all(|r| matches!(r.status, Status::Pass | Status::NotApplicable))
    }

    pub fn has_numerical_failure(&self) -> bool {
        self.stage_errors.iter().any(|e| e.numerical)
    }

    pub fn count(&self, status: Status) -> usize {
        self.relations.iter().filter(|r| r.status == status).count()
    }
}

struct Recorder {
    entries: Vec<RelationEntry>,
    errors: Vec<StageError>,
    timings: Vec<(&'static str, f64)>,
}

impl Recorder {
    fn check(&mut self, id: RelationId, residual: f64, tolerance: f64) {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        self.set(id, status, Some(residual), tolerance);
    }

    fn set(&mut self, id: RelationId, status: Status, residual: Option<f64>, tolerance: f64) {
        self.entries.retain(|e| e.id != id);
        self.entries.push(RelationEntry {
            id,
            status,
            residual,
            tolerance,
        });
    }

    fn fail_stage(&mut self, stage: &'static str, err: &Error) {
        self.errors.push(StageError {
            stage,
            kind: err.kind(),
            message: err.to_string(),
            numerical: err.is_numerical_failure(),
        });
    }

    fn timed<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((stage, start.elapsed().as_secs_f64()));
        out
    }
}

/// Runs the pipeline on `(H, P)` and records every relation.
///
/// Only malformed input (non-square `H`, dimension mismatch) is an error;
/// numerical trouble inside a stage is captured in `stage_errors` and marks
/// the dependent relations as not evaluated. A broken-phase spectrum marks
/// the signature-dependent relations as not applicable.
pub fn full_verification(
    h: &ComplexMatrix,
    p: &ParityOperator,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let pt_residual = check_pt_symmetry(h, p)?;
    let pseudo_residual = check_pseudo_hermiticity(h, p)?;
    let dim = h.rows();
    let symmetry_tol = tol.symmetry * h.max_abs().max(1.0);

    let mut rec = Recorder {
        entries: Vec::new(),
        errors: Vec::new(),
        timings: Vec::new(),
    };
    for id in RelationId::ALL {
        let tolerance = match id {
            RelationId::Signature => tol.sig,
            RelationId::DiagonalEquality => tol.diagonal,
            RelationId::PtCommutation | RelationId::PseudoHermiticity => symmetry_tol,
            _ => tol.relation,
        };
        rec.set(id, Status::NotEvaluated, None, tolerance);
    }
    rec.check(RelationId::PtCommutation, pt_residual, symmetry_tol);
    rec.check(RelationId::PseudoHermiticity, pseudo_residual, symmetry_tol);

    let mut extras = Extras::default();
    let mut details = ReportDetails {
        hamiltonian: h.clone(),
        parity: p.matrix().clone(),
        gram: None,
        gram_inverse: None,
        states: None,
        duals: None,
    };
    let mut eigenvalues = Vec::new();
    let mut diagnostics = None;
    let near = |d: ExceptionalDiagnostics| Diagnostics {
        eigvec_condition: d.eigvec_condition,
        min_eigen_gap: d.min_eigen_gap,
        near_exceptional: d.eigvec_condition.is_nan()
            || d.eigvec_condition > tol.near_exceptional_condition,
    };

    let paired = rec.timed("pairing", || pair_left_right(h, tol));
    let bi = match paired {
        Ok(sys) => {
            extras.pairing_residual = sys.pairing_residuals.iter().copied().reduce(f64::max);
            diagnostics = Some(near(diagnose_exceptional(&sys)));
            eigenvalues = sys.triples.iter().map(|t| t.value).collect();
            rec.timed("biorthonormalize", || biorthonormalize(&sys, tol))
        }
        Err(e) => {
            if let Ok(pairs) = eigendecompose_with(h, tol.eig) {
                let values: Vec<Complex64> = pairs.iter().map(|p| p.value).collect();
                let vectors: Vec<ComplexVector> = pairs.into_iter().map(|p| p.vector).collect();
                diagnostics = Some(near(diagnose_eigenbasis(&values, &vectors)));
                eigenvalues = values;
            }
            Err(e)
        }
    };
    let bi = match bi {
        Ok(bi) => bi,
        Err(e) => {
            rec.fail_stage("biorthonormal", &e);
            return Ok(finish(
                dim,
                p,
                eigenvalues,
                None,
                None,
                rec,
                diagnostics,
                extras,
                details,
            ));
        }
    };
    eigenvalues = bi.eigenvalues.clone();
    record_basis_relations(&mut rec, &bi, tol);

    let class = match rec.timed("classify", || classify_spectrum(&bi.eigenvalues, tol.real)) {
        Ok(c) => c,
        Err(e) => {
            rec.fail_stage("classify", &e);
            attach_gram(&mut details, &bi);
            return Ok(finish(
                dim,
                p,
                eigenvalues,
                None,
                None,
                rec,
                diagnostics,
                extras,
                details,
            ));
        }
    };
    let classification = Some(class.clone());

    if !class.unbroken {
        for id in RelationId::ALL.iter().filter(|id| id.needs_signature()) {
            let tolerance = rec
                .entries
                .iter()
                .find(|e| e.id == *id)
                .map_or(tol.relation, |e| e.tolerance);
            rec.set(*id, Status::NotApplicable, None, tolerance);
        }
        attach_gram(&mut details, &bi);
        return Ok(finish(
            dim,
            p,
            eigenvalues,
            classification,
            None,
            rec,
            diagnostics,
            extras,
            details,
        ));
    }

    let signed = rec.timed("signature", || {
        let (fixed, fixes) = fix_pt_phase(&bi, p, tol.phase)?;
        let phase_defect = fixes.iter().map(|f| f.defect).fold(0.0, f64::max);
        extract_signature(&fixed, p, tol).map(|(sys, s)| (sys, s, phase_defect))
    });
    let (sys, s) = match signed {
        Ok((sys, s, phase_defect)) => {
            extras.phase_defect = Some(phase_defect);
            (sys, s)
        }
        Err(e) => {
            rec.fail_stage("signature", &e);
            attach_gram(&mut details, &bi);
            return Ok(finish(
                dim,
                p,
                eigenvalues,
                classification,
                None,
                rec,
                diagnostics,
                extras,
                details,
            ));
        }
    };
    let signature = Some(s.clone());
    record_basis_relations(&mut rec, &sys, tol);
    let sig_residual = s.residuals.iter().copied().fold(0.0, f64::max);
    rec.check(RelationId::Signature, sig_residual, tol.sig);

    let start = Instant::now();
    let outcome = gram_stage(&mut rec, &mut extras, &mut details, h, p, &sys, &s, tol);
    rec.timings.push(("gram", start.elapsed().as_secs_f64()));
    if let Err(e) = outcome {
        rec.fail_stage("gram", &e);
    }
    Ok(finish(
        dim,
        p,
        eigenvalues,
        classification,
        signature,
        rec,
        diagnostics,
        extras,
        details,
    ))
}

/// Pairs, bi-orthonormalizes, fixes PT phases and extracts the signature,
/// failing if the spectrum is broken or any stage fails.
pub fn signed_basis(
    h: &ComplexMatrix,
    p: &ParityOperator,
    tol: &Tolerances,
) -> Result<(BiorthonormalSystem, Signature)> {
    let bi = biorthonormalize(&pair_left_right(h, tol)?, tol)?;
    let class = classify_spectrum(&bi.eigenvalues, tol.real)?;
    if let Some(&(first, second)) = class.conjugate_pairs.first() {
        return Err(Error::BrokenPhase { first, second });
    }
    let (fixed, _) = fix_pt_phase(&bi, p, tol.phase)?;
    extract_signature(&fixed, p, tol)
}

#[allow(clippy::too_many_arguments)]
fn gram_stage(
    rec: &mut Recorder,
    extras: &mut Extras,
    details: &mut ReportDetails,
    h: &ComplexMatrix,
    p: &ParityOperator,
    sys: &BiorthonormalSystem,
    s: &Signature,
    tol: &Tolerances,
) -> Result<()> {
    let pair = gram_matrix(sys)?;
    let g = &pair.gram;
    details.gram = Some(g.clone());
    details.gram_inverse = Some(inverse_via_signature(g, s)?);
    details.states = Some(sys.states.clone());
    details.duals = Some(sys.duals.clone());

    let theorem = verify_signature_theorem(g, s)?;
    rec.check(RelationId::GramInverse, theorem.residual, tol.relation);
    rec.check(
        RelationId::DiagonalEquality,
        theorem.diagonal_gap,
        tol.diagonal,
    );

    let solved = inverse(g)?;
    extras.dual_gram_vs_solve = Some(dual_gram(sys).sub(&solved)?.max_abs());

    let by_inversion = dual_via_inversion(&sys.states, g)?;
    let by_signature = dual_via_signature(&sys.states, g, s)?;
    let routes = max_vector_discrepancy(&by_signature, &by_inversion)
        .max(max_vector_discrepancy(&by_signature, &sys.duals));
    rec.check(RelationId::DualRoutes, routes, tol.relation);

    let charge = build_charge(sys, s)?;
    let props = charge_properties(&charge, h, p, sys)?;
    extras.charge_asymmetry = Some(props.asymmetry);
    rec.check(
        RelationId::ChargeProperties,
        props.worst_defect(),
        tol.relation,
    );

    rec.check(
        RelationId::IndefiniteCompleteness,
        check_unconventional_completeness(sys, s, p)?,
        tol.relation,
    );
    rec.check(
        RelationId::IndefiniteNorms,
        check_indefinite_norms(sys, s, p)?,
        tol.relation,
    );
    Ok(())
}

fn record_basis_relations(rec: &mut Recorder, sys: &BiorthonormalSystem, tol: &Tolerances) {
    let (a, b) = check_completeness(sys);
    rec.check(RelationId::Completeness, a.max(b), tol.relation);
    rec.check(RelationId::Duality, sys.duality_defect, tol.relation);
}

fn attach_gram(details: &mut ReportDetails, sys: &BiorthonormalSystem) {
    if let Ok(pair) = gram_matrix(sys) {
        details.gram_inverse = inverse(&pair.gram).ok();
        details.gram = Some(pair.gram);
    }
    details.states = Some(sys.states.clone());
    details.duals = Some(sys.duals.clone());
}

#[allow(clippy::too_many_arguments)]
fn finish(
    dim: usize,
    p: &ParityOperator,
    eigenvalues: Vec<Complex64>,
    classification: Option<SpectrumClassification>,
    signature: Option<Signature>,
    rec: Recorder,
    diagnostics: Option<Diagnostics>,
    extras: Extras,
    details: ReportDetails,
) -> VerificationReport {
    let mut relations = rec.entries;
    relations.sort_by_key(|e| RelationId::ALL.iter().position(|id| *id == e.id));
    VerificationReport {
        dim,
        parity: ParityInfo {
            kind: p.kind(),
            trivial: p.is_trivial(),
        },
        eigenvalues,
        classification,
        signature,
        relations,
        diagnostics,
        extras,
        stage_errors: rec.errors,
        timings: rec.timings,
        details,
    }
}
