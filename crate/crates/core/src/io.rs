//! JSON interchange for matrices and reports, plus the human-readable table.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::bench::BenchRow;
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::pt::ParityOperator;
use crate::verify::{RelationEntry, Status, VerificationReport, REPORT_SCHEMA};

/// Reading of the inversion-free dual formula, recorded in every report.
pub const DUAL_FORMULA: &str = "|E^n> = s_n sum_m s_m G_mn |E_m>";
/// Normalization applied before the Gram matrix is formed.
pub const NORMALIZATION: &str =
    "states fixed by P conj(|E_n>) = |E_n>, then rescaled so that <E_n|P|E_n> = s_n; duals satisfy <E^n|E_m> = delta_nm";

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Field {
        field: field.into(),
        message: message.into(),
    }
}

/// Writes `x` with 17 significant digits; non-finite values become `null`.
pub fn sig17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(format!("{x:.16e}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_none()
    }
}

pub fn sig17_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig17(v, s),
        None => s.serialize_none(),
    }
}

fn sig17_seq<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&Sig17(*x))?;
    }
    seq.end()
}

struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        sig17(&self.0, s)
    }
}

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn vectors_to_json(vs: &[ComplexVector]) -> JsonMatrix {
    vs.iter()
        .map(|v| v.as_slice().iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn matrix_from_json(
    field: &str,
    dim: usize,
    rows: &JsonMatrix,
) -> Result<ComplexMatrix, InputError> {
    if rows.len() != dim {
        return Err(field_error(
            field,
            format!("has {} rows, expected {dim}", rows.len()),
        ));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(field_error(
                field,
                format!("row {i} has {} entries, expected {dim}", row.len()),
            ));
        }
        data.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
    }
    ComplexMatrix::from_vec(dim, dim, data).map_err(|e| field_error(field, e.to_string()))
}

/// `{ "dim": n, "h": [[[re, im], ...], ...], "p": [[...]] }`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub dim: usize,
    pub h: JsonMatrix,
    pub p: JsonMatrix,
}

impl MatrixFile {
    pub fn new(h: &ComplexMatrix, p: &ParityOperator) -> Self {
        MatrixFile {
            dim: h.rows(),
            h: matrix_to_json(h),
            p: matrix_to_json(p.matrix()),
        }
    }

    pub fn parse(text: &str) -> Result<(ComplexMatrix, ParityOperator), InputError> {
        let file: MatrixFile = serde_json::from_str(text)?;
        if file.dim == 0 {
            return Err(field_error("dim", "must be at least 1"));
        }
        let h = matrix_from_json("h", file.dim, &file.h)?;
        let p = matrix_from_json("p", file.dim, &file.p)?;
        let p = ParityOperator::from_matrix(p).map_err(|e| field_error("p", e.to_string()))?;
        Ok((h, p))
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("matrix file serializes");
        out.push('\n');
        out
    }
}

#[derive(Serialize)]
struct Verdict {
    all_applicable_pass: bool,
    passed: usize,
    failed: usize,
    not_applicable: usize,
    not_evaluated: usize,
}

#[derive(Serialize)]
struct SignatureJson<'a> {
    values: &'a [i8],
    #[serde(serialize_with = "sig17_seq")]
    residuals: &'a [f64],
    valid: bool,
}

#[derive(Serialize)]
struct Conventions {
    dual_formula: &'static str,
    normalization: &'static str,
}

#[derive(Serialize)]
struct Matrices {
    h: JsonMatrix,
    p: JsonMatrix,
    gram: Option<JsonMatrix>,
    gram_inverse: Option<JsonMatrix>,
    /// One entry per state, listing its components.
    states: Option<JsonMatrix>,
    duals: Option<JsonMatrix>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema: &'static str,
    command: &'a str,
    dim: usize,
    parity: &'a crate::verify::ParityInfo,
    eigenvalues: Vec<[f64; 2]>,
    classification: &'a Option<crate::pt::SpectrumClassification>,
    signature: Option<SignatureJson<'a>>,
    relations: &'a [RelationEntry],
    verdict: Verdict,
    diagnostics: &'a Option<crate::verify::Diagnostics>,
    extras: &'a crate::verify::Extras,
    stage_errors: &'a [crate::verify::StageError],
    conventions: Conventions,
    timings: serde_json::Map<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrices: Option<Matrices>,
}

/// Serializes a report. `with_matrices` adds `H`, `P`, the Gram matrix, its
/// inverse and both bases.
pub fn report_to_json(report: &VerificationReport, command: &str, with_matrices: bool) -> String {
    let d = &report.details;
    let matrices = with_matrices.then(|| Matrices {
        h: matrix_to_json(&d.hamiltonian),
        p: matrix_to_json(&d.parity),
        gram: d.gram.as_ref().map(matrix_to_json),
        gram_inverse: d.gram_inverse.as_ref().map(matrix_to_json),
        states: d.states.as_deref().map(vectors_to_json),
        duals: d.duals.as_deref().map(vectors_to_json),
    });
    let json = ReportJson {
        schema: REPORT_SCHEMA,
        command,
        dim: report.dim,
        parity: &report.parity,
        eigenvalues: report.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        classification: &report.classification,
        signature: report.signature.as_ref().map(|s| SignatureJson {
            values: &s.values,
            residuals: &s.residuals,
            valid: s.valid,
        }),
        relations: &report.relations,
        verdict: Verdict {
            all_applicable_pass: report.all_applicable_pass(),
            passed: report.count(Status::Pass),
            failed: report.count(Status::Fail),
            not_applicable: report.count(Status::NotApplicable),
            not_evaluated: report.count(Status::NotEvaluated),
        },
        diagnostics: &report.diagnostics,
        extras: &report.extras,
        stage_errors: &report.stage_errors,
        conventions: Conventions {
            dual_formula: DUAL_FORMULA,
            normalization: NORMALIZATION,
        },
        timings: report
            .timings
            .iter()
            .map(|(stage, secs)| (stage.to_string(), serde_json::json!(secs)))
            .collect(),
        matrices,
    };
    let mut out = serde_json::to_string_pretty(&json).expect("report serializes");
    out.push('\n');
    out
}

fn status_label(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::NotApplicable => "n/a",
        Status::NotEvaluated => "not evaluated",
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im.abs() <= 1e-14 * z.norm() {
        format!("{:.12}", z.re)
    } else {
        format!(
            "{:.12} {} {:.12}i",
            z.re,
            if z.im < 0.0 { '-' } else { '+' },
            z.im.abs()
        )
    }
}

pub fn report_to_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    let kind = serde_json::to_value(report.parity.kind).unwrap_or_default();
    let _ = writeln!(
        out,
        "dimension {}  parity {}",
        report.dim,
        kind.as_str().unwrap_or("?")
    );
    if let Some(c) = &report.classification {
        let _ = writeln!(
            out,
            "phase     {}",
            if c.unbroken { "unbroken" } else { "broken" }
        );
    }
    let _ = writeln!(out, "eigenvalues");
    for (i, z) in report.eigenvalues.iter().enumerate() {
        let sign = report
            .signature
            .as_ref()
            .map_or(String::new(), |s| format!("  s = {:+}", s.values[i]));
        let _ = writeln!(out, "  {i:>4}  {}{sign}", fmt_complex(*z));
    }
    if let Some(d) = &report.diagnostics {
        let _ = writeln!(
            out,
            "eigenvector condition {:.3e}, min gap {:.3e}{}",
            d.eigvec_condition,
            d.min_eigen_gap,
            if d.near_exceptional {
                "  NEAR EXCEPTIONAL POINT"
            } else {
                ""
            }
        );
    }
    let _ = writeln!(
        out,
        "{:<26} {:>14} {:>10}  status",
        "relation", "residual", "tolerance"
    );
    for r in &report.relations {
        let residual = r.residual.map_or("-".to_string(), |x| format!("{x:.3e}"));
        let _ = writeln!(
            out,
            "{:<26} {:>14} {:>10.1e}  {}",
            r.id.as_str(),
            residual,
            r.tolerance,
            status_label(r.status)
        );
    }
    for e in &report.stage_errors {
        let _ = writeln!(out, "stage {} failed ({}): {}", e.stage, e.kind, e.message);
    }
    let _ = writeln!(
        out,
        "{}",
        if report.all_applicable_pass() {
            "all applicable relations pass"
        } else {
            "verification FAILED"
        }
    );
    out
}

#[derive(Serialize)]
struct BenchJson<'a> {
    schema: &'static str,
    rows: &'a [BenchRow],
}

pub fn bench_to_json(rows: &[BenchRow]) -> String {
    let mut out = serde_json::to_string_pretty(&BenchJson {
        schema: crate::bench::BENCH_SCHEMA,
        rows,
    })
    .expect("bench table serializes");
    out.push('\n');
    out
}

pub fn bench_to_text(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:>6} {:>12} {:>12} {:>9} {:>12}\n",
        "dim", "t_inv [s]", "t_sig [s]", "speedup", "discrepancy"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6} {:>12.3e} {:>12.3e} {:>9.2} {:>12.3e}",
            r.dim, r.t_inv, r.t_sig, r.speedup, r.discrepancy
        );
    }
    out
}
