use thiserror::Error;

/// Errors produced by the recovery kernels, solvers and the benchmark harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column submatrix is numerically rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("support of size {size} exceeds the {rows} available measurements")]
    SupportTooLarge { size: usize, rows: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("requested {requested} indices but only {available} candidates remain")]
    NotEnoughCandidates { requested: usize, available: usize },
    #[error("index {index} out of range for {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },
    #[error("duplicate index {0} in support")]
    DuplicateIndex(usize),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("every hope-tree candidate hit a degenerate support")]
    AllPathsDegenerate,
    #[error("driver iteration {iteration} added no new index")]
    DriverStalled { iteration: usize },
    #[error("signal is identically zero")]
    ZeroSignal,
    #[error("instance too large for exhaustive search: n = {n}, k_max = {k_max}")]
    InstanceTooLarge { n: usize, k_max: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
