use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series term cap exceeded: {0}")]
    Overflow(String),
    #[error("coefficient singularity: {0}")]
    CoefficientSingularity(String),
    #[error("step underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("step budget exhausted at x = {x}")]
    StepBudget { x: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("division: {0}")]
    Division(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("extrapolation error: {0}")]
    Extrapolation(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("recurrence breakdown at k = {0}")]
    Breakdown(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
