use thiserror::Error;

use crate::roots::RootError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("{op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A parameter failed validation. `field` uses the config key naming.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// The zero-profit condition has no interior solution.
    #[error("market not viable: {0}")]
    NotViable(String),

    #[error("root finding failed: {0}")]
    Root(#[from] RootError),

    #[error("segment {index}: {source}")]
    Segment { index: usize, source: Box<Error> },

    #[error("column {index}: {source}")]
    Column { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical solvers, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NotViable(_) | Error::Root(_) => true,
            Error::Segment { source, .. } | Error::Column { source, .. } => {
                source.is_solver_failure()
            }
            Error::Domain { .. } | Error::Invalid { .. } => false,
        }
    }
}
