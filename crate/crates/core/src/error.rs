use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the open interval (-1, 1)")]
    Domain { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("record too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("empty input")]
    Empty,

    #[error("eigenvalue solver did not converge")]
    EigenNoConvergence,

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("spectral radius of the sampled internal matrix is zero")]
    ZeroSpectralRadius,

    #[error("reservoir trajectory is identically zero (max |r| = {max_abs:e}); check the leakage parameter")]
    DeadReservoir { max_abs: f64 },

    #[error("autocorrelation Toeplitz matrix is not positive definite at order {order}; use a longer estimation record")]
    NotPositiveDefinite { order: usize },

    #[error("ratio must be positive, got {0}")]
    NonPositiveRatio(f64),

    #[error("model file: {0}")]
    Model(String),

    #[error("repetition {rep} of alpha = {alpha}, stage `{stage}`: {source}")]
    Cell {
        alpha: f64,
        rep: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
