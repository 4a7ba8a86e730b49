use thiserror::Error;

use crate::solver::SolveStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation precondition (mismatched base points,
    /// mismatched grids, mixing manifolds).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input lies outside the region where an operation is defined, e.g.
    /// beyond the cut locus or outside the well-posedness regime.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failed: {reason} (after {} iterations, gradient {:.3e})", stats.iterations, stats.final_gradient_norm)]
    Solver {
        reason: String,
        stats: Box<SolveStats>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
