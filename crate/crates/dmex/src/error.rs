//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A shape does not fit inside the requested image dimensions.
    #[error("shape out of bounds: {0}")]
    Bounds(String),

    /// Inconsistent or invalid configuration (counts, fractions, flags).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Layer shapes do not compose into a valid encoder.
    #[error("invalid architecture: {0}")]
    Arch(String),

    /// Tensor or image dimensions do not match.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The named layer cannot be used as an attribution target.
    #[error("layer {index} is not a convolutional layer")]
    Layer { index: usize },

    /// An activation cache does not belong to the given model.
    #[error("stale activation cache: {0}")]
    Cache(String),

    /// Bad magic, version, or truncation in a serialized model or table.
    #[error("bad file format: {0}")]
    Format(String),

    /// I/O failure, annotated with the file or sample it concerns.
    #[error("i/o error for {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// A test statistic was requested on a group with no samples.
    #[error("group {0} is empty")]
    EmptyGroup(String),

    /// Non-finite values or otherwise unusable numeric data.
    #[error("invalid data: {0}")]
    Data(String),

    /// A sample id was not found in the embedding set.
    #[error("sample {0} not found")]
    NotFound(String),

    /// A leave-one-out operation would empty a group.
    #[error("degenerate group: {0}")]
    DegenerateGroup(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
