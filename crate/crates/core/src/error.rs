use thiserror::Error;

/// Errors raised by the simulator and its numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The Gram matrix failed the relative eigenvalue floor.
    #[error("singular Gram matrix: min eigenvalue {min_eigenvalue:e}, max eigenvalue {max_eigenvalue:e}")]
    Singular {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("matrix is not Hermitian: max |A - A^H| = {0:e}")]
    NotHermitian(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidDimension(_) | Error::Domain(_) => 2,
            Error::Numerical(_) | Error::NotHermitian(_) | Error::Singular { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
