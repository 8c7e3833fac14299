use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside the range the numerics can represent.
    #[error("domain error: {0}")]
    Domain(String),
    /// The call itself is malformed (empty input, wrong basis, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// Adaptive quadrature stalled before reaching the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },
    /// A bracketed scalar search found no interior optimum.
    #[error("search error: {0}")]
    Search(String),
    /// The grid cannot represent the state faithfully (aliasing, spacing).
    #[error("resolution error: {0}")]
    Resolution(String),
    /// A conditional state with vanishing norm was requested.
    #[error("degenerate outcome: {0}")]
    DegenerateOutcome(String),
}

pub type Result<T> = std::result::Result<T, Error>;
