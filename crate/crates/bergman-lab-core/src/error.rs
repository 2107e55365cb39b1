use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A Gamma function argument hit a pole.
    #[error("pole: {0}")]
    Pole(String),
    /// A series or integral diverges for these parameters.
    #[error("divergent: {0}")]
    Divergent(String),
    /// An iterative method did not reach its tolerance.
    #[error("no convergence: {0}")]
    Convergence(String),
    /// Inputs have incompatible shapes.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
