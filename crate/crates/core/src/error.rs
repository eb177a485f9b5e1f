use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("seed {0} outside [1, 2^31-2]")]
    SeedOutOfRange(u32),
    #[error("not a permutation: {0}")]
    NotPermutation(String),
    #[error("invalid subproblem: {0}")]
    InvalidSubproblem(String),
    #[error("subproblem has no free jobs")]
    NoFreeJobs,
    #[error("digit {digit} at level {level} exceeds radix {radix}")]
    DigitOutOfRange { level: usize, digit: u32, radix: u32 },
    #[error("value does not fit in {0} factoradic digits")]
    Overflow(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty or reversed interval: {0}")]
    BadInterval(String),
    #[error("interval too small to split")]
    TooSmall,
    #[error("cannot branch a leaf")]
    BranchAtLeaf,
    #[error("{got} intervals for a pool of {capacity} explorers")]
    TooManyIntervals { got: usize, capacity: usize },
}
