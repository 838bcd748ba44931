use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("response is constant; the statistic is undefined")]
    DegenerateResponse,

    #[error("effective sample size {n_effective} is smaller than two slices of size {c}")]
    SampleTooSmall { n_effective: usize, c: usize },

    #[error("slice size must be at least 2, got {0}")]
    InvalidSliceSize(usize),

    #[error("covariate and response lengths differ ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },

    #[error("at least {min} observations are required, got {got}")]
    TooFewObservations { min: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("variance calibration must be positive and finite, got {0}")]
    InvalidCalibration(f64),

    #[error("every covariate column is constant")]
    AllColumnsConstant,

    #[error("model size {d} outside [1, {p}]")]
    InvalidSize { d: usize, p: usize },

    #[error("active set is empty")]
    EmptyActiveSet,

    #[error("covariate index {index} out of range for p = {p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),

    #[error("nominal FDR level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),

    #[error("AR(1) correlation must satisfy |rho| < 1, got {0}")]
    InvalidRho(f64),

    #[error("incompatible dimensions: {0}")]
    IncompatibleDimensions(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("replication {replication} failed: {source}")]
    Replication {
        replication: usize,
        #[source]
        source: Box<Error>,
    },
}
