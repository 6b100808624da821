use thiserror::Error;

pub type Result<T> = std::result::Result<T, SigError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SigError {
    #[error("alphabet dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("letter {letter} outside alphabet 0..={d}")]
    InvalidLetter { letter: u8, d: usize },

    #[error("polynomial degree {degree} exceeds truncation level {level}")]
    DegreeExceedsTruncation { degree: usize, level: usize },

    #[error("truncation levels differ: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("tensor exponential needs a zero constant term")]
    NonzeroConstantTerm,

    #[error("tensor is not group-like (level 0 must be 1)")]
    NotGroupLike,

    #[error("a sampled path needs at least two samples")]
    TooFewSamples,

    #[error("sample times must be strictly increasing")]
    NonMonotoneTimes,

    #[error("insertion times must be non-decreasing and inside [0, T]")]
    NonIncreasingTimes,

    #[error("|rho| = 1: weights using the second Brownian factor are undefined")]
    RhoAtBoundary,

    #[error("truncation level {level} too low, weight needs {required}")]
    TruncationTooLow { required: usize, level: usize },

    #[error("zero denominator on path {path}")]
    ZeroDenominator { path: usize },

    #[error("weight denominator polynomial vanishes identically: {0}")]
    DegenerateWeight(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("functional failed on path {path}: {msg}")]
    FunctionalFailed { path: usize, msg: String },
}
