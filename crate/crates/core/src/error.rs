use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stratum k={k} is out of range for N={n_terms} (need 1 <= k <= {max})")]
    InvalidStratum { n_terms: usize, k: usize, max: usize },

    #[error("subset must be a non-empty proper subset of the {n_terms} terms")]
    InvalidSubset { n_terms: usize },

    #[error("log-sum-exp of an empty term set")]
    EmptyTermSet,

    #[error("exponent magnitude {0} exceeds the direct-summation range; use the log-gap form")]
    RangeExceeded(f64),

    #[error("model too large: {0}")]
    ModelTooLarge(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sign vector has a zero entry (point lies on a locus)")]
    OnBoundary,

    #[error("region map has not been labeled")]
    NotLabeled,

    #[error("operation supports n={supported} only, model has n={actual}")]
    DimensionUnsupported { supported: usize, actual: usize },

    #[error("operation requires a linear family")]
    LinearOnly,

    #[error("power-sum exponent must satisfy lambda >= 1, got {0}")]
    InvalidLambda(f64),

    #[error("length list is lopsided at index {}", .0 + 1)]
    Lopsided(usize),

    #[error("invalid length list: {0}")]
    InvalidLengths(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
