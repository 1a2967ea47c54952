use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A dataset or configuration failed validation.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A design matrix does not have full column rank.
    #[error("rank-deficient {matrix} design matrix ({rank} < {cols} columns)")]
    RankDeficient {
        matrix: &'static str,
        rank: usize,
        cols: usize,
    },

    /// The information matrix could not be inverted.
    #[error("singular information matrix; offending column `{column}`")]
    SingularInformation { column: String },

    /// An objective or likelihood evaluated to a non-finite value.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An iterative solver gave up.
    #[error("solver failure: {0}")]
    Solver(String),

    /// Malformed input file.
    #[error("{path}: {message}")]
    Input { path: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidData(_) => "invalid_data",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::SingularInformation { .. } => "singular_information",
            Error::NonFinite(_) => "non_finite",
            Error::Solver(_) => "solver",
            Error::Input { .. } => "input",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
