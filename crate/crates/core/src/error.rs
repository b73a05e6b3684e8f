use alloc::string::String;

/// Errors produced by the spatial pooler, the block encoder and the matcher.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("column {column} has an empty hypercube after clipping")]
    EmptyHypercube { column: usize },

    #[error("unsupported channel count {0}")]
    UnsupportedChannels(usize),

    #[error("template store is empty")]
    EmptyStore,

    #[error("malformed flat matrix: {0}")]
    Format(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
