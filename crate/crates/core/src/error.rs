use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhymError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("nonconvergence: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, PhymError>;
