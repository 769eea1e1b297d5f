use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NpError {
    #[error("ambient dimension must be at least 1")]
    EmptyAmbient,

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("subspace containment violated (defect {defect:e})")]
    NotContained { defect: f64 },

    #[error("node outside the open ball (norm {norm})")]
    OutsideDomain { norm: f64 },

    #[error("nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),

    #[error("node is not one of the labelled Gram nodes")]
    UnlabeledNode,

    #[error("series truncation too short (tail bound {tail:e})")]
    TruncationTooShort { tail: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular similarity (smallest/largest singular value {ratio:e})")]
    SingularSimilarity { ratio: f64 },

    #[error("kernel is reducible on the node set: entry ({0}, {1}) vanishes")]
    Reducible(usize, usize),

    #[error("kernel fails the complete Nevanlinna-Pick test (min eigenvalue {min_eigenvalue:e})")]
    NotCompleteNp { min_eigenvalue: f64 },

    #[error("optimizer did not converge: best value {best}, restart spread {spread:e}")]
    NonConvergence { best: f64, spread: f64 },
}

impl NpError {
    /// Errors caused by the numbers themselves rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            NpError::SingularSimilarity { .. } | NpError::NonConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, NpError>;
