use thiserror::Error;

/// Errors raised by the library. Validation problems that are reported as
/// values (see [`crate::network::validate`]) do not go through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate network: {0}")]
    DegenerateNetwork(String),

    #[error("network has {n} relays, the limit is {max}")]
    SizeLimit { n: usize, max: usize },

    #[error("characteristic polynomial has a repeated root at sigma = {0}")]
    DegenerateRoot(f64),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("linear program {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
