use thiserror::Error;

/// Errors raised by the tree, sampling, moment and asymptotics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid preorder degree sequence: condition violated at index {index}")]
    InvalidPreorder { index: usize },

    #[error("invalid degree statistic: {0}")]
    InvalidStatistic(String),

    #[error("invalid degree sequence: degrees sum to {sum}, expected {expected}")]
    InvalidDegreeSequence { sum: u64, expected: u64 },

    #[error("size {size} exceeds the enumeration cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("degree statistic of size {size} is too small (needs at least {needed})")]
    SizeTooSmall { size: u64, needed: u64 },

    #[error("patterns must be pairwise distinct plane trees (duplicate at position {0})")]
    DuplicatePatterns(usize),

    #[error("product moment needs two distinct patterns")]
    EqualPatterns,

    #[error("no tree of size {0} has positive weight")]
    InfeasibleSize(u64),

    #[error("conditioned sampling gave up after {attempts} attempts (acceptance rate estimate {rate_estimate:.3e})")]
    AttemptsExhausted { attempts: u64, rate_estimate: f64 },

    #[error("exact arithmetic requires rational weights with finite support")]
    IrrationalWeights,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),

    #[error("root finding did not converge: {0}")]
    NotConverged(String),

    #[error("unsupported tail: {0}")]
    UnsupportedTail(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
