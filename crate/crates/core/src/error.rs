use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid word: symbol {symbol} at position {position} exceeds k = {k}")]
    InvalidWord { symbol: usize, position: usize, k: usize },

    #[error("expected {expected} rotation angles, got {got}")]
    AngleCount { expected: usize, got: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("map is not invertible: |det| = {det:e} at t = {t}")]
    NonInvertible { t: f64, det: f64 },

    #[error("invalid random product: {0}")]
    InvalidProduct(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite frame after {step} iterates; renormalization period {period} too large")]
    RenormalizationPeriodTooLarge { step: usize, period: usize },

    #[error("points are not homoclinic: {0}")]
    NotHomoclinic(String),

    #[error("invalid minor index: {0}")]
    InvalidMinor(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported pipeline: {0}")]
    UnsupportedPipeline(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
