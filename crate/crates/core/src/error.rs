use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("beta must be > -1 (got {0})")]
    InvalidBeta(f64),
    #[error("{name} out of domain: {detail}")]
    Domain { name: &'static str, detail: String },
    #[error("sample has {have} points but the kernel needs n = {need}")]
    TooFewPoints { have: usize, need: usize },
    #[error("brute force would enumerate {subsets} subsets (limit {limit})")]
    BruteForceGuard { subsets: u128, limit: u128 },
    #[error("kernel evaluation is not finite at {0}")]
    NonFinite(String),
    #[error("angular sub-Hessian is not negative definite (det(-G) = {0})")]
    SubHessianDegenerate(f64),
    #[error("radial partial {index} = {value} is not positive")]
    RadialPartialNonPositive { index: usize, value: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid maximizer: {0}")]
    InvalidMaximizer(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        name,
        detail: detail.into(),
    }
}
