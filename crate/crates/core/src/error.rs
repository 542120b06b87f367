use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dense solver cap exceeded: dimension {dim} > cap {cap}; use solve_lowest instead")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error(
        "eigensolver did not converge after {restarts} restarts (best residual {residual:.3e})"
    )]
    NoConvergence { restarts: usize, residual: f64 },

    #[error("band calculation: {0}")]
    Band(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::DenseCapExceeded { .. } | Error::Band(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
