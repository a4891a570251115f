use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The truncation window carries (numerically) no probability mass.
    #[error("degenerate interval ({t1}, {t2}): mass {mass:e}")]
    DegenerateInterval { t1: f64, t2: f64, mass: f64 },
    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimate {value} with error {error_estimate:e}")]
    NonConvergence { value: f64, error_estimate: f64 },
    /// The integrand (or a sampled functional) returned NaN or an infinity.
    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    /// The operation needs something the distribution cannot provide.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A weight function takes a negative value on the working interval.
    #[error("weight function is negative at x = {witness} (value {value:e})")]
    NegativeWeight { witness: f64, value: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
