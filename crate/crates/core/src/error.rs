use alloc::string::String;

/// Errors raised by the bound, spectrum and region computations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A channel or optimizer parameter lies outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A precondition of an operation was violated by its inputs.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A math function was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A table or enumeration would exceed the configured budget.
    #[error("resource limit: {what} needs {required} cells, budget is {budget}")]
    Resource { what: String, required: u128, budget: u128 },
    /// The tilting-measure fixed point did not settle.
    #[error(
        "fixed point did not converge after {iterations} iterations (k = {k:e}, residual_k = {residual_k:e}, residual_beta = {residual_beta:e})"
    )]
    NonConvergence { iterations: usize, k: f64, residual_k: f64, residual_beta: f64 },
    /// Boundary tracing found a ray whose verdicts are not monotone.
    #[error("non-monotone verdicts: {0}")]
    NonMonotone(String),
}

impl Error {
    /// Short machine-readable code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "E_PARAM",
            Error::Contract(_) => "E_CONTRACT",
            Error::Domain(_) => "E_DOMAIN",
            Error::Resource { .. } => "E_RESOURCE",
            Error::NonConvergence { .. } => "E_CONVERGENCE",
            Error::NonMonotone(_) => "E_MONOTONE",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! contract {
    ($($arg:tt)*) => { $crate::error::Error::Contract(alloc::format!($($arg)*)) };
}
macro_rules! invalid {
    ($($arg:tt)*) => { $crate::error::Error::InvalidParameter(alloc::format!($($arg)*)) };
}
pub(crate) use contract;
pub(crate) use invalid;
