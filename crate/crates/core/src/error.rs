use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error(
        "singular matrix: pivot {pivot:.3e} at column {column} below threshold {threshold:.3e}"
    )]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("ambiguous left/right pairing for eigenvalue index {index}: {candidates} candidates within {tol:.3e}")]
    AmbiguousPairing {
        index: usize,
        candidates: usize,
        tol: f64,
    },

    #[error("defective matrix: overlap block for eigenvalue cluster {cluster:?} is singular (reciprocal condition {rcond:.3e})")]
    DefectiveMatrix { cluster: Vec<usize>, rcond: f64 },

    #[error("invalid parity operator: {0}")]
    InvalidParity(String),

    #[error("complex eigenvalue {index} has no conjugate partner within tolerance")]
    UnpairedComplexEigenvalue { index: usize },

    #[error(
        "spectrum is in the broken phase: eigenvalues {first} and {second} form a conjugate pair"
    )]
    BrokenPhase { first: usize, second: usize },

    #[error("state {index} is not PT-invariant (proportionality defect {defect:.3e})")]
    NotPtInvariant { index: usize, defect: f64 },

    #[error("signature undefined for state {index}: parity norm {value:.3e} is numerically zero")]
    SignatureUndefined { index: usize, value: f64 },

    #[error("Gram matrix is not positive definite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("Gram matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "ensemble exhausted after {attempts} draws without an unbroken, well-conditioned instance"
    )]
    EnsembleExhausted { attempts: usize },
}

impl Error {
    /// Errors meaning the input could not be handled numerically at all, as
    /// opposed to a relation failing its tolerance.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::DefectiveMatrix { .. }
                | Error::SingularMatrix { .. }
                | Error::AmbiguousPairing { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidShape(_) => "InvalidShape",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite { .. } => "NonFinite",
            Error::NonConvergence(_) => "NonConvergence",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::AmbiguousPairing { .. } => "AmbiguousPairing",
            Error::DefectiveMatrix { .. } => "DefectiveMatrix",
            Error::InvalidParity(_) => "InvalidParity",
            Error::UnpairedComplexEigenvalue { .. } => "UnpairedComplexEigenvalue",
            Error::BrokenPhase { .. } => "BrokenPhase",
            Error::NotPtInvariant { .. } => "NotPTInvariant",
            Error::SignatureUndefined { .. } => "SignatureUndefined",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotHermitian(_) => "NotHermitian",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::EnsembleExhausted { .. } => "EnsembleExhausted",
        }
    }
}
