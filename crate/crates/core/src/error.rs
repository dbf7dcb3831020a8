use thiserror::Error;

/// Errors reported by distribution, table, policy, and simulation code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {observed} observation(s), need at least 2")]
    InsufficientData { observed: usize },

    #[error("no capacity to accept candidate {candidate}: all positions already reassigned")]
    CapacityViolation { candidate: usize },

    #[error("state (j={j}, X={x}, Y={y}) is outside the table grid")]
    OutOfGrid { j: usize, x: usize, y: usize },

    #[error("infeasible offline selection: {0}")]
    InfeasibleSelection(String),
}

pub type Result<T> = std::result::Result<T, Error>;
