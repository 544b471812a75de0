use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular (zero pivot at {0})")]
    SingularMatrix(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("QR iteration failed to converge for eigenvalue {index} after {iterations} sweeps")]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("time step {step}: linear solve did not converge ({iterations} iterations, relative residual {residual:e})")]
    StepNotConverged {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("boundary data evaluation failed: {0}")]
    BoundaryData(String),

    #[error("sparse factorisation failed: {0}")]
    Factorization(String),

    #[error("report I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("report format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
