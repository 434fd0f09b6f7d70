//! Crate-wide error type and result alias.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value is outside the accepted domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An allocation would exceed the configured memory budget.
    #[error(
        "capacity exceeded: {needed_bits} bits do not fit in a budget of {budget_bytes} bytes"
    )]
    Capacity { needed_bits: u128, budget_bytes: u64 },

    /// Mutation was attempted after the structure was frozen for reads.
    #[error("filter is frozen; inserts are no longer accepted")]
    Frozen,

    /// A text input could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A binary snapshot is malformed or does not match this version.
    #[error("snapshot error: {0}")]
    Snapshot(String),

    /// A dataset file is absent; the message says how to obtain it.
    #[error("dataset not found: {0}")]
    MissingDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
