use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input value lies outside the domain of the operation.
    #[error("input domain error: {0}")]
    InputDomain(String),

    /// A tuning parameter or configuration value is invalid.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("undefined score: {0}")]
    UndefinedScore(String),

    #[error("degenerate correlation: all probability deviations are zero")]
    DegenerateCorrelation,

    #[error("incompatible maps: {0}")]
    IncompatibleMaps(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid octree file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
