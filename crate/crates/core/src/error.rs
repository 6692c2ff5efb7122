use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure mode surfaced by the library.
///
/// [`Error::category`] gives a stable machine-readable tag, used by the CLI
/// when it reports a failure on stderr.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("standard deviation must be >= 0, got {0}")]
    NegativeSd(f64),
    #[error("cannot fit a Gaussian process on an empty training set")]
    EmptyTrainingSet,
    #[error("k = {k} clusters requested for {n} points")]
    KTooLarge { k: usize, n: usize },
    #[error("bad output dimension {got}: {reason}")]
    BadDimension { got: usize, reason: &'static str },
    #[error("cross-entropy target is not a probability vector (sum {sum})")]
    NonDistributionTarget { sum: f64 },
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("fidelity must lie in (0, 1], got {0}")]
    BadFidelity(f64),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("empty input range [{lo}, {hi}]")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("class count must be >= 2, got {0}")]
    BadClassCount(usize),
    #[error("both preference scores are zero")]
    BothZero,
    #[error("invalid input: {0}")]
    NegativeInput(&'static str),
    #[error("soft dataset has no confidences")]
    MissingConfidences,
    #[error("invalid network: {0}")]
    BadNetwork(String),
    #[error("config error: {0}")]
    ConfigParse(String),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::NegativeSd(_) => "NegativeSd",
            Error::EmptyTrainingSet => "EmptyTrainingSet",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::BadDimension { .. } => "BadDimension",
            Error::NonDistributionTarget { .. } => "NonDistributionTarget",
            Error::NonFiniteGradient => "NonFiniteGradient",
            Error::BadFidelity(_) => "BadFidelity",
            Error::EmptyDataset => "EmptyDataset",
            Error::EmptyRange { .. } => "EmptyRange",
            Error::BadClassCount(_) => "BadClassCount",
            Error::BothZero => "BothZero",
            Error::NegativeInput(_) => "NegativeInput",
            Error::MissingConfidences => "MissingConfidences",
            Error::BadNetwork(_) => "BadNetwork",
            Error::ConfigParse(_) => "ConfigParse",
            Error::Version { .. } => "Version",
            Error::Io(_) => "Io",
            Error::Serde(_) => "Serde",
            Error::Csv(_) => "Csv",
        }
    }

    pub(crate) fn dim(expected: usize, got: usize, context: &'static str) -> Self {
        Error::DimensionMismatch {
            expected,
            got,
            context,
        }
    }
}
