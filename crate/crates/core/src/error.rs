use thiserror::Error;

/// Everything the simulation layer can reject.
#[derive(Debug, Error)]
pub enum SimError {
    /// A parameter struct failed validation. The string names the offending
    /// field and the constraint it broke.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A run asked for something outside the experimental protocol
    /// (load above the failure threshold, overcurrent by construction, ...).
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// A channel went non-finite during integration.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A trace or series was too short for the requested analysis.
    #[error("window error: {0}")]
    Window(String),

    /// Degenerate input to a metric kernel (empty series, all-zero group).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

impl SimError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SimError::InvalidParameter(msg.into())
    }
    pub fn protocol(msg: impl Into<String>) -> Self {
        SimError::Protocol(msg.into())
    }
}
