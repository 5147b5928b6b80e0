use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum RadarError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `|w^H s~|` fell below tolerance, the MMF estimate is undefined.
    #[error("degenerate receive filter: |w^H s| is numerically zero")]
    DegenerateFilter,

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RadarError>;
