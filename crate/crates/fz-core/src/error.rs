use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum FzError {
    /// An (n, m) pair violating |m| <= n, the parity rule, or the degree ceiling.
    #[error("invalid index: {0}")]
    InvalidIndex(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched grid/table geometry (half-widths, sizes, truncations).
    #[error("geometry mismatch: {0}")]
    Geometry(String),

    /// Unknown descriptor name or malformed descriptor arguments.
    #[error("bad descriptor: {0}")]
    Descriptor(String),

    /// A file did not conform to one of the on-disk formats.
    #[error("format error: {0}")]
    Format(String),

    /// Convolution input carries mass outside the half-radius disk.
    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FzError>;
