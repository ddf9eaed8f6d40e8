use thiserror::Error;

/// Errors produced by the solver and the property checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("singular evaluation: g(0) is undefined when eps = 0")]
    SingularEvaluation,

    #[error("integration failed at r = {r}: {reason}")]
    Integration { r: f64, reason: String },

    #[error("shooting did not converge after {iterations} iterations (best a = {best_a}, miss = {best_miss})")]
    NoConvergence {
        iterations: usize,
        best_a: f64,
        best_miss: f64,
    },

    #[error("no sign change of the miss function: {0}")]
    NoBracket(String),

    #[error("profiles do not share a common grid")]
    GridMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("path is not Cauchy at tolerance {tol}: increments {increments:?}")]
    NotCauchy { tol: f64, increments: Vec<f64> },

    #[error("integrability not certified: cone constant {0} is not positive")]
    NotCertified(f64),

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
