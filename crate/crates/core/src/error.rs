use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("carrier mismatch: {0}")]
    Carrier(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("empty support: {0}")]
    EmptySupport(String),
    #[error("degenerate scale: scaling by the zero element")]
    DegenerateScale,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
