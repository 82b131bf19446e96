use thiserror::Error;

/// Failures raised by profile construction and the calculus built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convexity violation: {0}")]
    Convexity(String),
    #[error("boundary violation: {0}")]
    Boundary(String),
    #[error("coordinate mismatch: {0}")]
    Coordinate(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("unbounded mass: leftmost slope {0} is positive")]
    UnboundedMass(f64),
    #[error("arity error: expected {expected} factors, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("negative mass {mass} at tau = {tau} (scale {scale})")]
    NegativeMass { tau: f64, mass: f64, scale: f64 },
    #[error("membership error: {0}")]
    Membership(String),
    #[error("iteration failed: {message}")]
    Iteration { message: String, log: Box<crate::hte::IterationLog> },
    #[error("sequence refused: {0}")]
    NotCauchy(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
