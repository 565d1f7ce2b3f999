//! Error type shared by all modules of this crate.

use thiserror::Error;

/// Everything that can go wrong when constructing specs or running the
/// numerical machinery. Variants map onto distinct failure classes so
/// callers (CLI, bindings) can translate them into exit codes.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A spec or parameter set failed structural validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// The operation is not defined for this nonlinearity class.
    #[error("unsupported kind: {0}")]
    UnsupportedKind(String),

    /// A caller-supplied precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The balance temperature is degenerate and no profile exists.
    #[error("degenerate balance: {0}")]
    DegenerateBalance(String),

    /// A bisection bracket does not enclose the sought transition.
    #[error("invalid bracket: {0}")]
    Bracket(String),

    /// An iteration hit its cap before reaching the requested tolerance.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// A table or grid is too coarse for the requested diagnostic.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// A trajectory is too short to classify.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A non-finite value appeared where the scheme guarantees finiteness.
    #[error("numerical fault: {0}")]
    NumericalFault(String),
}

pub type Result<T> = std::result::Result<T, Error>;
