use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pressure derivative of order {0} is not supported (max 3)")]
    UnsupportedOrder(u8),

    #[error("invalid wave configuration: {0}")]
    InvalidWaveConfiguration(String),

    #[error("Lax entropy condition violated: {0}")]
    LaxViolation(String),

    #[error("relaxation time tau = {tau} too large: profile ODE needs tau < {limit}")]
    RelaxationTooLarge { tau: f64, limit: f64 },

    #[error("no viscous shock profile: {0}")]
    ProfileNonexistence(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("positivity failure: v = {value} in cell {cell} (dt = {dt})")]
    Positivity { cell: usize, value: f64, dt: f64 },

    #[error("time step underflow: dt = {dt}")]
    Stall { dt: f64 },

    #[error("step {step} at t = {t}: {source}")]
    Run {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("incomplete ingredients: {0}")]
    IncompleteIngredients(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serde(String),
}

impl Error {
    /// Validation problems are reported with a different exit status than
    /// failures that happen while computing.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::InvalidWaveConfiguration(_)
            | Error::RelaxationTooLarge { .. }
            | Error::LaxViolation(_) => true,
            Error::Run { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
