use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("spectrum is not conjugate-symmetric: imaginary residue {residue:.3e} exceeds {limit:.3e}")]
    SymmetryViolation { residue: f64, limit: f64 },

    #[error("plane of {cells} cells exceeds the dense oracle limit of {limit}")]
    OracleScale { cells: usize, limit: usize },

    #[error("box {0} lies outside the frame")]
    OutOfFrame(String),

    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),

    #[error("ill-conditioned spectral division at bin {bin}: {detail}")]
    Conditioning { bin: usize, detail: String },

    #[error("degenerate kernel {kernel}: weight denominator {value:.3e} is not above {floor:.3e}")]
    DegenerateKernel { kernel: usize, value: f64, floor: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid synthetic sequence: {0}")]
    Spec(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("frame {index}: {message}")]
    Sequence { index: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from numerics rather than input or IO.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::SymmetryViolation { .. }
                | Error::Conditioning { .. }
                | Error::DegenerateKernel { .. }
                | Error::Numerical(_)
                | Error::Precondition(_)
        )
    }
}
