use thiserror::Error;

use crate::grid::Space;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("field is in {found:?} space, expected {expected:?}")]
    WrongSpace { expected: Space, found: Space },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite amplitudes in {0}")]
    NonFinite(&'static str),

    #[error("state has zero mass")]
    ZeroMass,

    #[error("numerical blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid eigen index: {0}")]
    InvalidIndex(String),

    #[error("grid cannot resolve the requested mode: {0}")]
    UnderResolved(String),

    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),

    #[error("no mode coefficient exceeds the threshold")]
    EmptyDecomposition,

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Configuration problems map to CLI exit code 2, everything else to 1.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidParams(_)
                | Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::InvalidIndex(_)
        )
    }
}
