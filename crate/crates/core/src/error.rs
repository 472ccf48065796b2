use alloc::string::String;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested transform or operation has no implementation for this kind.
    #[error("{module}: capability not available: {what}")]
    Capability { module: &'static str, what: String },

    #[error("point lies outside the domain: {0}")]
    OutsideDomain(String),

    #[error("solver diverged at iteration {iter}: {reason}")]
    Diverged { iter: usize, reason: String },

    /// A candidate point failed the optimality residual checks.
    #[error("certification failed: {0}")]
    NotCertified(String),

    /// A dual point cannot certify a primal solution (degenerate or infeasible signal).
    #[error("degenerate dual: {0}")]
    DegenerateDual(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn capability(module: &'static str, what: impl Into<String>) -> Error {
    Error::Capability {
        module,
        what: what.into(),
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
