use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidPmf(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty support")]
    EmptySupport,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex enumeration truncated: {subsets} subsets exceed the cap of {cap}")]
    TruncatedEnumeration { subsets: u128, cap: u64 },
    #[error("linear program infeasible (numerical breakdown): {0}")]
    InfeasibleLp(String),
    #[error("samples are not mutually independent (max deviation {0:e})")]
    NotIndependent(f64),
    #[error("exact computation budget exceeded: {0}")]
    BudgetExceeded(String),
}
