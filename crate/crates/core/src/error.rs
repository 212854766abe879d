use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("expected level-0 coefficient {expected}, found {found}")]
    LevelZero { expected: f64, found: f64 },

    #[error("expected coefficient {expected} on the empty forest, found {found}")]
    UnitCoefficient { expected: f64, found: f64 },

    #[error("element is not in the Lie algebra (Dynkin deviation {0:e})")]
    NotLie(f64),

    #[error("element is not group-like (proper-forest mass {0:e})")]
    NotGroupLike(f64),

    #[error("time {t} outside domain [{start}, {end}]")]
    OutOfDomain { t: f64, start: f64, end: f64 },

    #[error("invalid interval: s = {s} > t = {t}")]
    InvalidInterval { s: f64, t: f64 },

    #[error("jet order {needed} required but only {available} available")]
    InsufficientJetOrder { needed: usize, available: usize },

    #[error("grade {grade} exceeds cap {cap}")]
    GradeTooLarge { grade: usize, cap: usize },

    #[error("label {label} outside 1..={width}")]
    BadLabel { label: usize, width: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("numerical failure: {0}")]
    NonFinite(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures caused by the numerics rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite(_))
    }
}
