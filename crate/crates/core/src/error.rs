use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("factor index {index} out of range for {factors} factors")]
    IndexOutOfRange { index: usize, factors: usize },

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownState(String),

    #[error("malformed state file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("conditioning sector has population {0:e}, below the 1e-6 floor")]
    EmptySector(f64),

    #[error(
        "trace drifted by {drift:e} at t = {time} (step {step}); dt = {dt} is too large, \
         try dt <= {suggested:e}"
    )]
    TraceDrift {
        step: usize,
        time: f64,
        drift: f64,
        dt: f64,
        suggested: f64,
    },

    #[error(
        "dt = {dt} exceeds the RK4 stability limit for this system \
         (spectral radius bound {radius:.3}); use dt <= {suggested:e}"
    )]
    UnstableStep { dt: f64, radius: f64, suggested: f64 },
}
