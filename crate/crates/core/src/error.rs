use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (Frobenius deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Coarse failure class, used by front ends to pick exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_) | Error::DimensionMismatch(..) => ErrorClass::Usage,
            Error::NotHermitian(_)
            | Error::NotUnitary(_)
            | Error::Numerical(_)
            | Error::Degenerate(_) => ErrorClass::Numerical,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => ErrorClass::Io,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Numerical,
    Io,
}

pub type Result<T> = std::result::Result<T, Error>;
