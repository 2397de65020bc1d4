use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty scenario")]
    EmptyScenario,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("node {0} is not in the alive set")]
    NodeNotAlive(usize),

    #[error("no undercharged heads left to plan for")]
    NoUnderchargedHeads,

    #[error(
        "charger did not finish within {budget} steps \
         ({remaining} of {total} targets still undercharged, worst deficit {worst_deficit:.6} J)"
    )]
    StepBudgetExceeded {
        budget: u64,
        remaining: usize,
        total: usize,
        worst_deficit: f64,
    },

    #[error("invalid calibration bounds [{low}, {high}]")]
    InvalidBounds { low: f64, high: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
