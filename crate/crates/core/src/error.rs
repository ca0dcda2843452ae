use thiserror::Error;

use crate::mip::BackendError;
use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration cap exceeded: {what} needs {needed} > cap {cap}")]
    CapExceeded { what: &'static str, needed: u128, cap: u128 },
    #[error("time limit reached without an incumbent")]
    NoIncumbent,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("instance format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
