use thiserror::Error;

/// Errors produced by the tree-space library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("incompatible splits: {0} and {1}")]
    IncompatibleSplits(String, String),

    #[error("leaf sets differ")]
    LeafSetMismatch,

    #[error("attribute dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("unknown branch label {0:?}")]
    UnknownLabel(String),

    #[error("graph is disconnected into {} components: {components:?}", components.len())]
    Disconnected { components: Vec<Vec<String>> },

    #[error("computation failed: {0}")]
    Computation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Computation(_) | Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
