use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Validation` covers rejected inputs (out-of-range dimensions, geometry
/// outside its ambient set, malformed model rules); `Computation` covers
/// failures of a well-posed computation (singular systems, infeasible
/// meshes). The CLI maps these to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("computation error: {0}")]
    Computation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn computation(msg: impl Into<String>) -> Self {
        Error::Computation(msg.into())
    }
}
