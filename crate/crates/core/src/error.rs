use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("count mismatch: {elements} POM elements for {states} states")]
    CountMismatch { elements: usize, states: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid POM: {0}")]
    InvalidPom(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("outcome {0} has zero probability")]
    ZeroProbabilityOutcome(usize),

    #[error("unknown checkpoint `{0}`")]
    UnknownCheckpoint(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("state preparation failed: best fidelity {0:.15}")]
    PreparationFailed(f64),

    #[error("POM reconstruction residual {0:e} exceeds tolerance")]
    Reconstruction(f64),

    #[error("noise parameter {0} outside [0, 1]")]
    InvalidGamma(f64),

    #[error("row {0} is all zero after perturbation")]
    DegenerateRow(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::CountMismatch { .. } => "count-mismatch",
            Error::InvalidState(_) => "invalid-state",
            Error::InvalidEnsemble(_) => "invalid-ensemble",
            Error::InvalidPom(_) => "invalid-pom",
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::ZeroProbabilityOutcome(_) => "zero-probability-outcome",
            Error::UnknownCheckpoint(_) => "unknown-checkpoint",
            Error::UnknownLabel(_) => "unknown-label",
            Error::InvalidNetwork(_) => "invalid-network",
            Error::PreparationFailed(_) => "preparation-failed",
            Error::Reconstruction(_) => "reconstruction",
            Error::InvalidGamma(_) => "invalid-gamma",
            Error::DegenerateRow(_) => "degenerate-row",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
