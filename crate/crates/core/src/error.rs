use thiserror::Error;

use crate::vectors::Backend;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("backend mismatch: expected {expected}, found {found}")]
    BackendMismatch { expected: Backend, found: Backend },
    #[error("scale N must be at least 2 (got {0})")]
    InvalidScale(usize),
    #[error("index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("step function of level {level} needs {expected} values, got {found}")]
    StepLength { level: u32, expected: usize, found: usize },
    #[error("cannot coarsen a step function from level {from} to level {to}")]
    StepLevel { from: u32, to: u32 },
    #[error("bank needs {expected} filters, got {found}")]
    FilterCount { expected: usize, found: usize },
    #[error("polyphase matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("filter bank fails the low-pass condition (deviation {deviation:e})")]
    NotLowpass { deviation: f64 },
    #[error("invalid cell assignment: {0}")]
    InvalidAssignment(String),
    #[error("enumeration of {terms} terms exceeds the cap of {cap}")]
    TooManyTerms { terms: u128, cap: u128 },
    #[error("every vector was dropped by the rank tolerance")]
    EmptySpan,
    #[error("subspace is not co-invariant (residual {residual:e})")]
    NotCoinvariant { residual: f64 },
    #[error("subspace is not wandering (overlap {overlap:e})")]
    NotWandering { overlap: f64 },
    #[error("subspace is reducing: S L equals L")]
    Reducing,
    #[error("window radius {given} too small, need at least {required}")]
    WindowTooSmall { given: i64, required: i64 },
    #[error("|lambda| = {0} is not inside the unit disk")]
    LambdaOutsideDisk(f64),
    #[error("grid cannot represent dilation {j} with translation {k} at level {level}")]
    ResolutionUnderflow { j: i32, k: i64, level: i32 },
    #[error("grid: {0}")]
    Grid(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
