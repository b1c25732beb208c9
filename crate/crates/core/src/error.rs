use thiserror::Error;

use crate::generate::GenError;
use crate::instances::{InstanceError, ParseError};
use crate::lpcore::{LpError, PropertyViolation};
use crate::oracle::OracleError;
use crate::states::StateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("LP relaxation is infeasible: {0}")]
    Infeasible(String),
    #[error("children of node {node} carry probability mass {children}, expected {expected}")]
    ProbabilityMass { node: usize, children: f64, expected: f64 },
    #[error("modified solution violates {0:?}")]
    Modification(Vec<PropertyViolation>),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit status: 2 infeasible, 3 size cap exceeded, 4 broken
    /// invariant, 5 malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 2,
            Error::State(StateError::CapExceeded { .. }) => 3,
            Error::Oracle(OracleError::TooLarge { .. }) => 3,
            Error::Parse(_) | Error::Instance(_) | Error::Generate(_) | Error::Oracle(_) => 5,
            Error::State(StateError::Instance(_)) => 5,
            Error::State(_)
            | Error::Lp(_)
            | Error::ProbabilityMass { .. }
            | Error::Modification(_)
            | Error::Invariant(_) => 4,
        }
    }
}
