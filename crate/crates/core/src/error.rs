use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("csv input, line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("time column is not strictly increasing at row {row}")]
    NonMonotoneTime { row: usize },

    #[error("duplicate series name `{0}`")]
    DuplicateName(String),

    #[error("series `{0}` is constant")]
    ConstantSeries(String),

    #[error("unknown series `{0}`")]
    UnknownSeries(String),

    #[error("series names differ between datasets: {0}")]
    NameMismatch(String),

    #[error("datasets are sampled on different time grids")]
    GridMismatch,

    #[error("invalid alignment for series `{series}`: {details}")]
    InvalidAlignment { series: String, details: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
