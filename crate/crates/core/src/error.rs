use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report. Variant names are stable and are what
/// the command line prints on numerical failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("columns are linearly dependent: residual norm {residual:e} at column {column}")]
    RankDeficient { column: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("perplexity {perplexity} is infeasible for {n} points")]
    InfeasiblePerplexity { perplexity: f64, n: usize },

    #[error("point {row} has zero distance to every other point")]
    DegenerateRow { row: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("zero margin: {0}")]
    EmptyMargin(String),

    #[error("could not place {clusters} centers at separation {separation} after {attempts} attempts")]
    SeparationInfeasible {
        clusters: usize,
        separation: f64,
        attempts: usize,
    },

    #[error("subsample would be empty: {0}")]
    EmptyResult(String),

    #[error("k = {k} must be smaller than n = {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("at least two classes are required")]
    SingleClass,

    #[error("index {index} out of range for {n} rows")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("session is done; no further events are accepted")]
    EventAfterDone,

    #[error("neighbor graph covers {graph} rows but the session has {session}")]
    GraphSizeMismatch { graph: usize, session: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short variant name, e.g. `"InfeasiblePerplexity"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "RankDeficient",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::InfeasiblePerplexity { .. } => "InfeasiblePerplexity",
            Error::DegenerateRow { .. } => "DegenerateRow",
            Error::NonFinite(_) => "NonFinite",
            Error::EmptyMargin(_) => "EmptyMargin",
            Error::SeparationInfeasible { .. } => "SeparationInfeasible",
            Error::EmptyResult(_) => "EmptyResult",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::SingleClass => "SingleClass",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::EventAfterDone => "EventAfterDone",
            Error::GraphSizeMismatch { .. } => "GraphSizeMismatch",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
