use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("bad problem parameters: {0}")]
    BadParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Some constraint is not strictly positive at a point where the barrier
    /// must be evaluated.
    #[error("point is not strictly feasible: a[{index}] = {value}")]
    BoundaryViolation { index: usize, value: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("trust-region root-find did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("iteration limit of {limit} reached")]
    IterationLimit { limit: usize },

    #[error("premise violated: {0}")]
    PremiseViolated(String),

    #[error("certificate verification failed: {0}")]
    CertificateVerificationFailed(String),
}
