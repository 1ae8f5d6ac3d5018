use std::fmt;

use crate::types::ConfigViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series length mismatch: {what} ({left} vs {right})")]
    SeriesLengthMismatch {
        what: String,
        left: usize,
        right: usize,
    },

    #[error("invalid configuration:\n{0}")]
    Config(ConfigViolations),

    #[error("battery count {requested} exceeds the per-participant limit {limit}")]
    CapacityExceeded { requested: u32, limit: u32 },

    #[error("total demand is zero; distribution factors are undefined")]
    DegenerateDemand,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("instance too large for exhaustive enumeration: {0}")]
    OracleLimitExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Every violation found while validating a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigViolations(pub Vec<ConfigViolation>);

impl fmt::Display for ConfigViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
