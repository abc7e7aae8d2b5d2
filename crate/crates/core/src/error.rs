use thiserror::Error;

use crate::constraints::ConstraintKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid architecture: {0}")]
    InvalidArch(String),

    #[error("incomplete assignment: gate {0} has no start tick")]
    IncompleteAssignment(usize),

    #[error("gate {gate} cannot be scheduled: {reason}")]
    Unschedulable { gate: usize, reason: String },

    #[error("schedule violates {constraint:?}: {message}")]
    Infeasible { constraint: ConstraintKind, message: String },

    #[error("instance too large for exhaustive enumeration: {gates} gates (limit {limit})")]
    InstanceTooLarge { gates: usize, limit: usize },

    #[error("no feasible schedule within horizon {0}")]
    HorizonTooSmall(u32),

    #[error("infeasible clock: quantum period holds no whole classical cycle")]
    InfeasibleClock,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value outside calibrated range: {0}")]
    OutOfRange(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
