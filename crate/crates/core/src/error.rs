use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A ring descriptor violated one of its parameter bounds.
    #[error("invalid ring spec `{spec}`: {reason}")]
    RingSpec { spec: String, reason: String },

    /// Table validation failed after construction. This points at a constructor bug.
    #[error("internal consistency failure in {context}: {detail}")]
    InternalConsistency { context: String, detail: String },

    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("capacity exceeded for {what}: {needed} > {limit}{hint}")]
    Capacity {
        what: String,
        needed: u128,
        limit: u128,
        hint: String,
    },

    #[error("unknown defect strategy `{0}` (expected default, literal, commutator or radical-depth)")]
    UnknownStrategy(String),

    #[error("strategy `{strategy}` is not defined here: {reason}")]
    StrategyDomain { strategy: String, reason: String },

    #[error("additive degree exceeds the derivative-order cap {cap}")]
    DegreeUnbounded { cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("inadmissible datum: {0}")]
    Inadmissible(String),
}

impl Error {
    pub(crate) fn capacity(what: impl Into<String>, needed: u128, limit: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            needed,
            limit,
            hint: String::new(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::DegreeUnbounded { .. })
    }
}
