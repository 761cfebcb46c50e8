use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("matrix is not Hermitian (max |X - X'| entry = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue = {0:.3e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    BadTrace(f64),

    #[error("invalid Renyi order {0}: must lie in [1/2, 1) or (1, inf)")]
    InvalidOrder(f64),

    #[error("Renyi order {0} outside the bound window (1, 2]")]
    OrderOutsideWindow(f64),

    #[error("invalid Schatten exponent {0}: need p >= 1")]
    InvalidExponent(f64),

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("hash input size n = {0} exceeds the enumeration budget (n <= 8)")]
    InputWidthTooLarge(usize),

    #[error("output bits m = {m} exceed input bits n = {n}")]
    OutputWidthTooLarge { n: usize, m: usize },

    #[error("family with {0} members is too large for exact expectation; use the sampled estimator")]
    FamilyTooLarge(usize),

    #[error("function index {index} out of range (family has {len} members)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("weights must be nonnegative and sum to 1 (sum = {0})")]
    BadWeights(f64),

    #[error("probability table not normalized (sum = {0})")]
    BadProbabilityTable(f64),

    #[error("map is not trace non-increasing (largest eigenvalue of sum K'K = {0})")]
    NotTraceNonincreasing(f64),

    #[error("operator is not normal (|MM' - M'M| = {0:.3e})")]
    NotNormal(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
