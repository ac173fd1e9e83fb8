use thiserror::Error;

use crate::lattice::Shape;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("integrand is not finite at t = {at} (value {value})")]
    NonFiniteIntegrand { at: f64, value: f64 },

    #[error("integrand shape changed across quadrature nodes: {expected} then {found}")]
    InconsistentIntegrand { expected: Shape, found: Shape },

    #[error("probe set is empty")]
    EmptyProbeSet,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors raised by argument validation rather than by a numerical routine.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument { .. } | Error::ShapeMismatch { .. } | Error::EmptyProbeSet
        )
    }
}
