use thiserror::Error;

/// Errors raised by the split regression routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least {required} observations, got {got}")]
    TooFewObservations { required: usize, got: usize },

    #[error("degenerate input: column {column} is constant")]
    ConstantColumn { column: usize },

    #[error("degenerate input: response is constant")]
    ConstantResponse,

    #[error("degenerate fold {fold}: column {column} is constant on the training rows")]
    DegenerateFold { fold: usize, column: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("alpha = 0 has no l1 threshold; the null-model penalty is undefined")]
    ZeroAlpha,

    #[error("the fit at lambda_d = 0 is already null; maximal diversity is undefined")]
    NullFit,

    #[error("uniqueness is not guaranteed: lambda_d = {lambda_d} >= 1 - rho = {bound}")]
    NotUnique { lambda_d: f64, bound: f64 },

    #[error("threshold undefined: marginal coefficient T{index} is zero")]
    UndefinedThreshold { index: usize },

    #[error("null coefficient vector: signal variance is zero")]
    NullSignal,

    #[error("covariance matrix is not positive semi-definite (eigenvalue {0})")]
    NotPositiveSemiDefinite(f64),

    #[error("search for {0} did not bracket a solution")]
    SearchFailed(&'static str),

    #[error("all candidates failed; last error: {0}")]
    AllCandidatesFailed(Box<Error>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dims(expected: impl std::fmt::Display, got: impl std::fmt::Display) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
