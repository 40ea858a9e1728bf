use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field is on the wrong side of the transform: {0}")]
    WrongSide(String),
    #[error("invalid axis {0}")]
    InvalidAxis(usize),
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("lambda {lambda} outside representable band |lambda| <= {limit}")]
    LambdaOutOfBand { lambda: f64, limit: f64 },
    #[error("fiber numerically non-invertible at this discretization (lambda = {lambda}, cond = {cond:e}, limit = {limit:e})")]
    NonInvertible { lambda: f64, cond: f64, limit: f64 },
    #[error("operator not invertible on fibers at lambda = {0:?}")]
    FibersNotInvertible(Vec<f64>),
    #[error("series diverges: eps * ||Op(s)|| = {0} >= 1")]
    Divergent(f64),
    #[error("kernel is not symmetric (max Hermitian defect {0:e})")]
    NotSymmetric(f64),
    #[error("insufficient lambda resolution: {0}")]
    InsufficientResolution(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
