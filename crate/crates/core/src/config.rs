use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the pipeline.
///
/// All values are absolute unless the field says otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative eigen-residual bound, `|M v - lambda v| <= eig |M|_F |v|`.
    pub eig: f64,
    /// Relative residual for linear solves.
    pub solve: f64,
    /// Left/right eigenvalue matching window.
    pub pair: f64,
    /// Eigenvalues closer than this form a degenerate cluster.
    pub dup: f64,
    /// Smallest admissible singular value of a cluster overlap block.
    pub defect: f64,
    /// `|Im E| <= real * (1 + |E|)` counts as real.
    pub real: f64,
    /// Allowed deviation from `P conj(v) = e^{i alpha} v`.
    pub phase: f64,
    /// Signature residual bound (2-norm).
    pub sig: f64,
    /// Default bound for the identity-type relations of the checklist.
    pub relation: f64,
    /// Bound on `|G_nn - (G^-1)_nn|`.
    pub diagonal: f64,
    /// Relative bound on symmetry residuals, scaled by `max(1, max_abs(H))`.
    pub symmetry: f64,
    /// Eigenvector-matrix condition number above which a system is flagged
    /// as near an exceptional point.
    pub near_exceptional_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig: 1e-10,
            solve: 1e-12,
            pair: 1e-6,
            dup: 1e-8,
            defect: 1e-10,
            real: 1e-8,
            phase: 1e-6,
            sig: 1e-8,
            relation: 1e-8,
            diagonal: 1e-10,
            symmetry: 1e-12,
            near_exceptional_condition: 1e6,
        }
    }
}

impl Tolerances {
    /// Rejects non-positive or non-finite thresholds, naming the field.
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("eig", self.eig),
            ("solve", self.solve),
            ("pair", self.pair),
            ("dup", self.dup),
            ("defect", self.defect),
            ("real", self.real),
            ("phase", self.phase),
            ("sig", self.sig),
            ("relation", self.relation),
            ("diagonal", self.diagonal),
            ("symmetry", self.symmetry),
            (
                "near_exceptional_condition",
                self.near_exceptional_condition,
            ),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!(
                    "tolerance `{name}` must be positive and finite, got {value}"
                ));
            }
        }
        Ok(())
    }
}
