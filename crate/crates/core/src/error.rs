use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("malformed IQ trace: {len} bytes is not a multiple of 8")]
    MalformedLength { len: u64 },

    #[error("input has zero mean power")]
    ZeroPowerInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("separation left no noise bins")]
    EmptyNoiseGroup,

    #[error("no noise eigenvalues: {signal} signal eigenvalues out of {total}")]
    NoNoiseEigenvalues { signal: usize, total: usize },

    #[error("linear system is singular after ridge regularisation")]
    SingularSystem,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("estimate is not a positive finite power ({0})")]
    NonPositiveEstimate(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the data itself rather than by usage.
    pub fn is_degenerate_data(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSpectrum(_)
                | Error::EmptyNoiseGroup
                | Error::ZeroPowerInput
                | Error::NonPositiveEstimate(_)
                | Error::SingularSystem
                | Error::NoNoiseEigenvalues { .. }
                | Error::NonFiniteSample { .. }
                | Error::InsufficientSamples { .. }
                | Error::MalformedLength { .. }
        )
    }
}
