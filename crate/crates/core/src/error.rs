use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violates a physical admissibility condition (vacuum, bad gas, non-unit normal).
    #[error("domain error: {0}")]
    Domain(String),
    /// A state at a grid node left the admissible region.
    #[error("invalid state at node ({i}, {j}): {reason}")]
    InvalidNode { i: usize, j: usize, reason: String },
    /// Operator or case configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),
    /// Array shapes do not agree.
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A boundary analysis step hit a degenerate locus (u_n = 0 or beta = 0).
    #[error("degenerate boundary state: {0}")]
    Degenerate(Degeneracy),
    /// Operation needs a boundary but the grid is periodic.
    #[error("operation requires a bounded grid")]
    NoBoundary,
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// Normal velocity is zero: A11 and A22 vanish.
    StationaryNormalFlow,
    /// beta(M_n^2) = 0, i.e. M_n^2 sits on the critical value.
    BetaRoot,
}

impl std::fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Degeneracy::StationaryNormalFlow => write!(f, "u_n = 0"),
            Degeneracy::BetaRoot => write!(f, "beta(M_n^2) = 0"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
