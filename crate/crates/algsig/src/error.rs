use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The variants are coarse on purpose: callers (the CLI in particular) map
/// them onto exit codes, and the message carries the detail.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation
    /// (non-finite input, point outside the interval, `x <= 0` for gamma).
    #[error("domain error: {0}")]
    Domain(String),

    /// A theorem hypothesis or operation precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A parameter is malformed (zero order, inverted interval, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The function does not provide what the operation needs, such as a
    /// derivative of the requested order.
    #[error("capability error: {0}")]
    Capability(String),

    /// An iterative procedure did not reach its tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// A result would not fit the integer range used to represent it.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Grid refinement disagreed by more than the accepted amount.
    #[error("accuracy error: {message} (refinement disagreement {disagreement:e})")]
    Accuracy { message: String, disagreement: f64 },

    /// An internal invariant failed; indicates a bug rather than bad input.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {x}")))
    }
}
