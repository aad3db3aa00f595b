use thiserror::Error;

use crate::davidson::Unconverged;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("capacity exceeded for {what}: {required} bytes required, {available} bytes available")]
    Capacity {
        what: String,
        required: u64,
        available: u64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty basis: {0}")]
    EmptyBasis(String),

    #[error("Davidson did not converge within {} iterations (last residual {:.3e})", .0.trace.len(), .0.residual_norm)]
    NonConvergence(Box<Unconverged>),

    #[error("Davidson stagnated after {} iterations: every correction vector was linearly dependent", .0.trace.len())]
    Stagnation(Box<Unconverged>),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format { line, msg: msg.into() }
    }
}
