use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("map leaves SL_m: {0}")]
    NotSpecialLinear(String),

    #[error("numerically singular matrix (|det| = {0:e})")]
    Singular(f64),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure has {found} atoms, exceeding the cap of {cap}")]
    AtomCap { found: usize, cap: usize },

    #[error("{words} words exceed the enumeration cap of {cap}")]
    WordCap { words: f64, cap: usize },

    #[error("derivative unavailable for {0} maps")]
    NotDifferentiable(&'static str),

    #[error("kernel has no exact transition rows")]
    MissingRows,

    #[error("measure is not stationary (residual {0:e})")]
    NotStationary(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("tails vanish; increase chains or reduce ε")]
    TailsVanish,

    #[error("model/noise mismatch: {0}")]
    ModelMismatch(String),

    #[error("orthonormal frame degenerated (diagonal entry {0:e})")]
    FrameDegenerate(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
