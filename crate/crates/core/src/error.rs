use thiserror::Error;

/// Unified error type for grid construction, data ingestion and analysis.
#[derive(Debug, Error)]
pub enum SdError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sobolev order {requested} unsupported on radial grids (max {max})")]
    UnsupportedSobolevOrder { requested: u32, max: u32 },
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid initial data: {0}")]
    InvalidData(String),
    #[error("diagnostic records unusable: {0}")]
    BadRecords(String),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SdError>;
