use thiserror::Error;

/// Errors raised by the engine.
///
/// Variants are grouped by the class of failure so front ends can map them
/// onto exit codes: [`Error::is_capacity`] and [`Error::is_numerical`] pick
/// out the two non-input classes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown symbol `{symbol}` (expected one of: {expected})")]
    UnknownSymbol { symbol: String, expected: String },

    #[error("symbol set mismatch: {0}")]
    SetMismatch(String),

    #[error("invalid symbol set: {0}")]
    InvalidSymbolSet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("divergence undefined: target weight on `{symbol}` is zero where the source weight is {weight}")]
    Divergence { symbol: String, weight: f64 },

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("invalid proof: {0}")]
    InvalidProof(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("enumeration of {required} terms exceeds the cap of {cap}")]
    Capacity { required: u128, cap: u128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    /// Non-finite values and undefined divergences.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Divergence { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
