use thiserror::Error;

pub type Result<T> = std::result::Result<T, PeerRankError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeerRankError {
    #[error("grade matrix is empty")]
    Empty,

    #[error("grade matrix is not square: row {row} has {found} entries, expected {expected}")]
    NotSquare { row: usize, found: usize, expected: usize },

    #[error("mask shape does not match matrix: row {row} has {found} entries, expected {expected}")]
    MaskShape { row: usize, found: usize, expected: usize },

    /// Row and column are zero-based.
    #[error("entry out of range at row {row}, column {col}: {value} is not in [0, 1]")]
    OutOfRange { row: usize, col: usize, value: f64 },

    #[error("agent {agent} has no graders")]
    NoGraders { agent: usize },

    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grade {value} at index {index} is not in [0, 1]")]
    GradeOutOfRange { index: usize, value: f64 },

    #[error("agent index {index} out of range for {m} agents")]
    AgentOutOfRange { index: usize, m: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigenvector check is undefined for the all-zero grade vector")]
    ZeroVector,

    #[error("eigenvector check requires a full (unmasked) grade matrix")]
    MaskedMatrix,

    /// Line and column are one-based, as a spreadsheet would show them.
    #[error("{source_name}: line {line}, column {col}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        col: usize,
        message: String,
    },

    #[error("{0}")]
    Io(String),
}

impl PeerRankError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        PeerRankError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
