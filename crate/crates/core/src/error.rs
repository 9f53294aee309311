use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angle {0}: must be finite")]
    InvalidAngle(f64),

    #[error("binding error: no value for parameter slot {0}")]
    MissingParam(usize),

    #[error("circuit contains unbound parameter slot {0}")]
    Unbound(usize),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("coupling map error: {0}")]
    Coupling(String),

    #[error("gate {gate} is not in the basis set")]
    NonBasis { gate: String },

    #[error("unmatched segment on wire {wire}, segment {position}: signature [{signature}] is not in the LUT")]
    UnmatchedSegment {
        wire: usize,
        position: usize,
        signature: String,
    },

    #[error("ambiguous LUT entry for signature [{signature}]: candidates {candidates}")]
    Ambiguous {
        signature: String,
        candidates: String,
    },

    #[error("structure mismatch: {0}")]
    StructureMismatch(String),

    #[error("no recovery model for template [{0}]")]
    MissingModel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
