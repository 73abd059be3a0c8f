use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("{0} failed to converge")]
    NoConvergence(&'static str),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{qubits} qubits exceeds the dense limit of {max}")]
    TooLarge { qubits: usize, max: usize },
    #[error("trace drifted by {drift:.3e} during integration; reduce the step size")]
    TraceDrift { drift: f64 },
    #[error("trajectory norm collapsed to {norm:.3e}")]
    NormCollapse { norm: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 2 for bad input, 1 for failures during compute.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Csv(_) => 2,
            _ => 1,
        }
    }
}
