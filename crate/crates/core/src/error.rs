use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("metric is not symmetric positive definite")]
    NotSpd,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("components are not antisymmetric (defect {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("components are not symmetric (defect {0:.3e})")]
    NotSymmetric(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sample carries jets of depth {have}, need {need}")]
    InsufficientJetDepth { need: usize, have: usize },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),
    #[error("non-finite value during integration at t = {t}")]
    NonFinite { t: f64 },
    #[error("no root in band: {0}")]
    NoRootInBand(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownAlgebra(String),
}

pub type Result<T> = std::result::Result<T, Error>;
