use thiserror::Error;

/// Errors raised by the numerical routines and experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("not a valid quantum state: {0}")]
    NotAState(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("bases are not mutually unbiased (max overlap deviation {0:e})")]
    MubViolation(f64),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("invalid search configuration: {0}")]
    ConfigInvalid(String),

    #[error("boundary perturbation requires square dimensions, got {0}x{1}")]
    NonSquareDim(usize, usize),

    #[error("malformed state file: {0}")]
    Parse(String),

    #[error("output failed: {0}")]
    Output(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
