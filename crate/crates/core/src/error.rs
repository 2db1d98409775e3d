use thiserror::Error;

/// Errors raised by the library and mapped onto CLI exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid erasure probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid deadline config: {0}")]
    InvalidConfig(String),

    #[error("pattern length {len} is not compatible with {what}")]
    LengthMismatch { len: usize, what: String },

    #[error("malformed erasure symbol {0:?} (expected one of 00, 01, 10, 11)")]
    MalformedSymbol(String),

    #[error("unknown policy {0:?} (expected greedy_full, current_csi or past_csi)")]
    UnknownPolicy(String),

    #[error("policy {policy} cannot run on this config: {reason}")]
    PolicyMismatch { policy: String, reason: String },

    #[error("enumeration guard: {0}")]
    Guard(String),

    #[error("cost-to-go table does not cover ({l1}, {l2}, {t})")]
    CostTableTooSmall { l1: u32, l2: u32, t: u32 },

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the CLI: 2 invalid config, 3 guard violation,
    /// 4 validation failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Guard(_) | Error::CostTableTooSmall { .. } => 3,
            Error::OracleMismatch(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
