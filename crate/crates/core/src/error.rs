use thiserror::Error;

/// Errors raised by the tracking and fusion pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("invalid exponent {0}: must lie in (0, 1]")]
    InvalidExponent(f64),

    #[error("empty density: {0}")]
    EmptyDensity(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid GLMB density: {0}")]
    InvalidGlmb(String),

    #[error("invalid first moment: existence {existence} for index {index} exceeds 1")]
    InvalidMoment { index: usize, existence: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate update: no association hypothesis has positive weight")]
    DegenerateUpdate,

    #[error("degenerate fusion: every fusion map has zero weight (reference hypothesis {hypothesis})")]
    DegenerateFusion { hypothesis: String },

    #[error("fusion with node {node} failed: {source}")]
    FusionAtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid truncation: density has cardinality {cardinality} above n_max {n_max}")]
    Truncation { cardinality: usize, n_max: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
