use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Invalid partition, precision or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("precision mismatch: expected 2^-{expected} grid, got 2^-{found}")]
    PrecisionMismatch { expected: u32, found: u32 },

    /// No tagged grid point lies in the requested open window.
    /// `index` is the 1-based sequence index when raised while building a sequence.
    #[error("resolution exhausted{}", .index.map(|n| format!(" at index {n}")).unwrap_or_default())]
    ResolutionExhausted { index: Option<usize> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("unsupported integrand: {0}")]
    UnsupportedIntegrand(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
