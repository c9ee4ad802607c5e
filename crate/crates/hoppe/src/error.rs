//! Crate-wide error type.

/// Errors raised by parameter validation, guard rails and overflow checks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("theta must be positive, got {0}")]
    NonPositiveTheta(f64),
    #[error("tree must have at least one vertex")]
    EmptyTree,
    #[error("vertex {vertex} out of range for a tree with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("parent array invalid at vertex {vertex}: parent {parent} is not smaller")]
    InvalidParent { vertex: usize, parent: usize },
    #[error("enumeration is limited to n <= {max}, got n = {n}")]
    EnumerationTooLarge { n: usize, max: usize },
    #[error("brute-force Wiener index is limited to n <= {max}, got n = {n}")]
    BruteForceTooLarge { n: usize, max: usize },
    #[error("tree statistic overflowed 64-bit integer range at n = {0}")]
    StatOverflow(usize),
    #[error("invalid jump kernel: {0}")]
    BadKernel(String),
    #[error("operation requires a centered kernel (mean shift 0)")]
    KernelNotCentered,
    #[error("argument must lie in [0, 1], got {0}")]
    UnitIntervalDomain(f64),
    #[error("digamma argument must be positive, got {0}")]
    DigammaDomain(f64),
    #[error("subtree size m = {m} out of range 1..={max}")]
    SubtreeSizeOutOfRange { m: usize, max: usize },
    #[error("u-pool is not converged (generation {got}, need at least {need})")]
    PoolNotConverged { got: u32, need: u32 },
    #[error("pool of kind {got} fed to a {want} iteration")]
    PoolKindMismatch { got: String, want: String },
    #[error("pool must not be empty")]
    EmptyPool,
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("need at least {need} replicates, got {got}")]
    TooFewReplicates { need: u64, got: u64 },
    #[error("unknown statistic '{0}' (expected T, W, U, U/n2 or sn-var)")]
    UnknownStatistic(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
