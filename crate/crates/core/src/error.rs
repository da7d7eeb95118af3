use thiserror::Error;

/// Errors raised by mesh construction, discretization, and the solver.
#[derive(Debug, Error)]
pub enum HdgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("unsupported request: {0}")]
    Capability(String),

    #[error("point or time outside of its element/slab: {0}")]
    Domain(String),

    #[error("invalid input data: {0}")]
    Data(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("internal numerical error: {0}")]
    Internal(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HdgError>;
