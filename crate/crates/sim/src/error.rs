use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid outcome model: {0}")]
    InvalidModel(String),

    #[error("invalid contract: {0}")]
    InvalidContract(String),

    #[error("invalid agent: {0}")]
    InvalidAgent(String),

    #[error("configuration mismatch: {0}")]
    Config(String),

    #[error("tiny-game spec not enumerable: {0}")]
    NotEnumerable(String),

    #[error(transparent)]
    Core(#[from] agentsel_core::CoreError),
}

pub type Result<T> = std::result::Result<T, SimError>;
