use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("panel needs at least {min} observations, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("panel has no series")]
    EmptyPanel,
    #[error("non-finite value in series {series} at t={t}")]
    NonFinite { series: usize, t: usize },
    #[error("non-positive value in series {series} at t={t}; log transform undefined")]
    NonPositiveEntry { series: usize, t: usize },
    #[error("series name count {names} does not match series count {series}")]
    NameMismatch { names: usize, series: usize },
    #[error("S00 is numerically singular (min eigenvalue {min_eig:e}, threshold {threshold:e})")]
    SingularS00 { min_eig: f64, threshold: f64 },
    #[error("negative eigenvalue {0:e} passed to the test statistic")]
    NegativeEigenvalue(f64),
    #[error("invalid test configuration: {0}")]
    InvalidConfig(String),
    #[error("resolved test level {0} is outside (0, 1)")]
    InvalidLevel(f64),
    #[error("number of trends m={m} must lie in [1, {n}]")]
    InvalidM { m: usize, n: usize },
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("leading {m}x{m} loading block is numerically singular (|det| = {det:e})")]
    SingularBlock { m: usize, det: f64 },
    #[error("D'D is rank deficient after {attempts} attempts")]
    RankDeficientD { attempts: usize },
    #[error("need at least {needed} non-zero observations for the tail estimator, got {got}")]
    InsufficientTail { needed: usize, got: usize },
    #[error("parse error at line {line}, column {col}: {msg}")]
    ParseError {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("ragged rows: line {line} has {got} fields, expected {expected}")]
    RaggedRows {
        line: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite cell at line {line}, column {col}")]
    NonFiniteCell { line: usize, col: usize },
    #[error("invalid simulation design: {0}")]
    InvalidDgp(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Input errors are the caller's fault; everything else is numerical.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::SingularS00 { .. }
                | Error::NegativeEigenvalue(_)
                | Error::SingularBlock { .. }
                | Error::RankDeficientD { .. }
        )
    }

    /// Stable machine-readable code used in CLI error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooShort { .. } => "TooShort",
            Error::EmptyPanel => "EmptyPanel",
            Error::NonFinite { .. } => "NonFinite",
            Error::NonPositiveEntry { .. } => "NonPositiveEntry",
            Error::NameMismatch { .. } => "NameMismatch",
            Error::SingularS00 { .. } => "SingularS00",
            Error::NegativeEigenvalue(_) => "NegativeEigenvalue",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::InvalidLevel(_) => "InvalidLevel",
            Error::InvalidM { .. } => "InvalidM",
            Error::InvalidOrdering(_) => "InvalidOrdering",
            Error::SingularBlock { .. } => "SingularBlock",
            Error::RankDeficientD { .. } => "RankDeficientD",
            Error::InsufficientTail { .. } => "InsufficientTail",
            Error::ParseError { .. } => "ParseError",
            Error::RaggedRows { .. } => "RaggedRows",
            Error::NonFiniteCell { .. } => "NonFinite",
            Error::InvalidDgp(_) => "InvalidDgp",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
