use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("source in failure set")]
    SourceInFailureSet,
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(usize, usize),
    #[error("enumeration budget exceeded: side of size {0} > {1}")]
    EnumerationBudget(usize, usize),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("spread overflow: log2 spread = {0:.1} exceeds 60")]
    SpreadOverflow(f64),
    #[error("point set: {0}")]
    Points(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown construction: {0}")]
    UnknownConstruction(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
