use thiserror::Error;

/// Errors raised by the numerical kernels and the allocator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the function's domain.
    #[error("{function}: argument outside domain ({detail})")]
    Domain {
        function: &'static str,
        detail: String,
    },
    /// An iterative method or quadrature missed its error target.
    #[error("{what} did not converge (estimate {estimate:e}, error bound {error:e})")]
    NoConvergence {
        what: &'static str,
        estimate: f64,
        error: f64,
    },
    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
    /// Input sits on a degenerate point where the closed form has no interior solution.
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("singular denominator in {0}")]
    Singular(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
