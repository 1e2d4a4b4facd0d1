use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{field} out of range: {value} (allowed {allowed})")]
    OutOfRange {
        field: &'static str,
        value: String,
        allowed: String,
    },

    #[error("hypothesis violated for {setting}: {constraint}")]
    Hypothesis { setting: String, constraint: String },

    #[error("missing constant {0}")]
    MissingConstant(&'static str),

    #[error("iterate diverged at t = {t}")]
    Diverged { t: usize },

    #[error("trials diverged: {0:?}")]
    TrialsDiverged(Vec<usize>),

    #[error("reference solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("reference minimizer has norm {norm} outside the ball of radius {radius}; increase ball_B")]
    BallTooSmall { norm: f64, radius: f64 },

    #[error("point outside the regularizer domain (norm {norm} > {radius})")]
    OutsideDomain { norm: f64, radius: f64 },

    #[error("checkpoint t = {t} outside the validity window t >= {min_t}")]
    OutsideValidity { t: usize, min_t: usize },

    #[error("averaging weight at k = {k} is not positive")]
    NonPositiveWeight { k: usize },

    #[error("enumeration needs {count} subsets, limit is 1000000")]
    Combinatorial { count: u128 },

    #[error("trace carries no iterate history")]
    MissingHistory,

    #[error("no complexity corollary for setting {0}")]
    NoCorollary(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
