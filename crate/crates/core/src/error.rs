use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("autoregressive coefficients {coeffs:?} are not stationary (reflection coefficient {reflection} at order {order})")]
    Stationarity {
        coeffs: Vec<f64>,
        order: usize,
        reflection: f64,
    },

    #[error("series length {0} is too short (need at least 2)")]
    InvalidLength(usize),

    #[error("GARCH constraint violated: {0}")]
    GarchConstraint(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical instability in {stage} at step {step}: {detail}")]
    NumericalInstability {
        stage: &'static str,
        step: usize,
        detail: String,
    },

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("cannot parse {value:?} as a number at row {row}")]
    Parse { row: u64, value: String },

    #[error("column {0} not found")]
    MissingColumn(String),

    #[error("series has zero variance over the requested segment")]
    DegenerateSeries,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite value in input at column {column}")]
    NonFiniteInput { column: usize },

    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),

    #[error("sample counts differ: {left} vs {right}")]
    SampleCountMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("training diverged at epoch {epoch}, batch {batch}")]
    TrainingDiverged { epoch: usize, batch: usize },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("window alignment has an empty intersection")]
    EmptyIntersection,

    #[error("distance correlation profile is identically zero")]
    DegenerateProfile,

    #[error("all {0} targets are below the MAPE threshold")]
    DegenerateTargets(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a numerical or runtime failure.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Stationarity { .. }
                | Error::InvalidLength(_)
                | Error::GarchConstraint(_)
                | Error::InvalidParameter(_)
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Parse { .. }
                | Error::MissingColumn(_)
                | Error::InsufficientData(_)
                | Error::InvalidConfig(_)
                | Error::EmptyIntersection
                | Error::Alignment(_)
        )
    }
}
