use thiserror::Error;
use voxkv_core::analysis::AnalysisError;
use voxkv_core::cachesim::SimError;
use voxkv_core::mapper::MapperError;
use voxkv_core::store::StoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("capacity exhausted: {0}")]
    Capacity(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::CapacityExhausted { .. } => CliError::Capacity(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<MapperError> for CliError {
    fn from(e: MapperError) -> Self {
        match e {
            MapperError::Store(s) => s.into(),
            MapperError::Io(io) => CliError::Output(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Mapper(m) => m.into(),
            AnalysisError::Store(s) => s.into(),
            AnalysisError::Sim(s) => s.into(),
            AnalysisError::InvalidInput(msg) => CliError::Config(msg),
            AnalysisError::Csv(c) => CliError::Output(c.to_string()),
            AnalysisError::Io(io) => CliError::Output(io.to_string()),
        }
    }
}
