use thiserror::Error;

/// Errors raised across the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("not a function: {0}")]
    NotAFunction(String),
    #[error("not total on the declared domain: {0}")]
    NotTotal(String),
    #[error("fiber size exceeds bound {0}")]
    FiberTooLarge(usize),
    #[error("empty fiber over the declared parameter set")]
    EmptyFiber,
    #[error("point outside domain")]
    OutsideDomain,
    #[error("not affine: {0}")]
    NonAffine(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("duplicate frequency {0}")]
    DuplicateFrequency(u64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("numeric oracle: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Syntax { line, col, msg: msg.into() }
    }
}
