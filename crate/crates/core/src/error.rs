use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no connected Watts-Strogatz graph after {attempts} attempts")]
    Disconnected { attempts: u32 },

    #[error("epidemic did not reach {target} infected nodes within {steps} steps")]
    StepCapExceeded { steps: usize, target: usize },

    #[error("loss mask is empty")]
    EmptyMask,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training needs at least 2 instances, got {0}")]
    TooFewInstances(usize),

    #[error("feature schema mismatch: {0}")]
    FeatureSchema(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
