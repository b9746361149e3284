use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset has fewer than {needed} distinct points after {retries} sampling attempts")]
    NotEnoughDistinctPoints { needed: usize, retries: usize },

    #[error("dataset is not binary (label {label} found, expected 0 or 1)")]
    NotBinary { label: usize },

    #[error("minimum input norm r is zero; the region bound is undefined")]
    ZeroMinNorm,

    #[error(
        "weights lie in the bifurcation zone (w_{neuron}^T x_{sample} = 0); \
         re-initialize with a different seed"
    )]
    BifurcationZone { neuron: usize, sample: usize },

    #[error("zero variance in series `{0}`")]
    ZeroVariance(String),

    #[error("unknown dataset kind `{0}`")]
    UnknownDatasetKind(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
