use thiserror::Error;

/// Errors raised by the simulator, the device builders and the ZX compiler.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("rewrite not applicable: {0}")]
    Rewrite(String),
    #[error("diagram is not LO-convertible: {}", .0.join("; "))]
    Conversion(Vec<String>),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
