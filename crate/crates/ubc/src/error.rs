use thiserror::Error;

use crate::coeff::Ring;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: expected {0}, got {1}")]
    DegreeMismatch(usize, usize),

    #[error("backend mismatch: {0} vs {1}")]
    BackendMismatch(String, String),

    #[error("coefficient ring mismatch: {0} vs {1}")]
    RingMismatch(Ring, Ring),

    #[error("unsupported backend for this operation: {0}")]
    UnsupportedBackend(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cap exceeded at {cap}: best {best} against target {target}")]
    CapExceeded {
        cap: usize,
        best: String,
        target: String,
    },

    #[error("no admissible tower family: {0}")]
    TowerInfeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {at}: {msg}")]
    Parse { at: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(at: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            at: at.into(),
            msg: msg.into(),
        }
    }
}
