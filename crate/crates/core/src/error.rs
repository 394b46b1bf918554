use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {0} out of range (1..=8)")]
    DegreeOutOfRange(usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("gram matrix is singular for n={n}, d={d} (need d >= n)")]
    SingularGram { n: usize, d: usize },
    #[error("weingarten residual {0:e} exceeds tolerance")]
    WeingartenResidual(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("size guard: {0} exceeds {1}")]
    SizeGuard(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("series never converged within the sampled window")]
    NeverConverged,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
