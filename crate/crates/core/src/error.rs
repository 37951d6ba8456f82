use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("order-statistic depth must be an integer, got {0}")]
    NonIntegerEll(f64),
    #[error("order-statistic depth {ell} outside 1..={num_points}")]
    EllOutOfRange { ell: f64, num_points: usize },
    #[error("moment exponent must satisfy 1 <= q < inf, got {0}")]
    QBelowOne(f64),
    #[error("dimension and sample count must be positive integers, got {0}")]
    NonPositiveDimension(String),
    #[error("k = {k} outside 1..={len}")]
    KOutOfRange { k: usize, len: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("delta must lie in (0, 1/e), got {0}")]
    DeltaOutOfRange(f64),
    #[error("insufficient samples: n_samples * delta = {0} < 50")]
    InsufficientSamples(f64),
    #[error("division by zero: denominator support value is 0")]
    DivisionByZero,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("numerical integration failed: {0}")]
    IntegrationFailure(String),
    #[error("no finite bracket for the Luxemburg norm")]
    NoFiniteBracket,
    #[error("conjugate at x = {0} is not attained within the domain hint")]
    UnboundedConjugate(f64),
    #[error("not an Orlicz function: {0}")]
    NotOrlicz(String),
    #[error("q = {q} exceeds log N = {log_n}")]
    QOutOfRegime { q: f64, log_n: f64 },
    #[error("t must be >= 1, got {0}")]
    TBelowOne(f64),
    #[error("stream identifier does not fit the 64-bit stream space: {0}")]
    StreamOverflow(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
