use alloc::string::String;

use crate::diff::OpKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {kind}: {lhs:?} vs {rhs:?}")]
    Dimension {
        kind: OpKind,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid graph signal: {0}")]
    Signal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training diverged at epoch {epoch}, bucket {bucket}: loss = {loss}")]
    Diverged { epoch: usize, bucket: usize, loss: f64 },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn signal(msg: impl Into<String>) -> Self {
        Error::Signal(msg.into())
    }
}
