use thiserror::Error;

/// Errors produced by the epsilon-net library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),

    #[error("coordinate {value} exceeds the supported magnitude {limit}")]
    CoordinateOutOfRange { value: i64, limit: i64 },

    /// The input violates the general position contract.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A bounding plane has no graph form.
    #[error("vertical bounding plane has no dual point")]
    VerticalPlane,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A constructed net failed the exact verifier, or a checked invariant did
    /// not hold. Either one indicates a bug or an unlucky sample that exceeded
    /// its retry budget.
    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("retry cap of {cap} exceeded: {what}")]
    RetryCapExceeded { cap: usize, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command line tool: 1 for verification or
    /// assertion failures, 2 for degenerate, invalid or unreadable input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::VerificationFailed(_) | Error::RetryCapExceeded { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
