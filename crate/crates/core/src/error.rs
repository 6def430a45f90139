use thiserror::Error;

/// Errors produced by the solvers, constructions and the certificate layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("free set contains no full-rank state")]
    NoFullRankFreeState,

    #[error("no convergence after {iterations} iterations (best gap {best_gap:e})")]
    NonConvergence { iterations: usize, best_gap: f64 },

    #[error("state is free; no advantage task exists")]
    NotAResourceState,

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("a channel must be supplied for mixed input states")]
    ChannelRequired,

    #[error("a pure input state is required")]
    PureStateRequired,
}

impl Error {
    /// Stable identifier used in CLI diagnostics and certificates.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::NoFullRankFreeState => "NoFullRankFreeState",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::NotAResourceState => "NotAResourceState",
            Error::InvalidChannel(_) => "InvalidChannel",
            Error::ChannelRequired => "ChannelRequired",
            Error::PureStateRequired => "PureStateRequired",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
