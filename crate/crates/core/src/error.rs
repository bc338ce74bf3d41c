use thiserror::Error;

/// Errors raised by the probability engine and its supporting modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A hypergeometric denominator parameter hit a Pochhammer zero.
    #[error("pole: {0}")]
    Pole(String),

    /// Channel parameters put the closed form outside its validity range.
    #[error("parameters outside the validity regime: {0}")]
    NumericalRegime(String),

    /// A numerical evaluation did not meet its own accuracy contract.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The calibration reference could not be used to fix the global scale.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Quadrature did not converge under node doubling.
    #[error("quadrature resolution error: {0}")]
    Quadrature(String),

    /// Malformed user input (mode labels, configuration, flags).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::InvalidParameter(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
