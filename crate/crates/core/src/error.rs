use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error{}{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default(), .field.as_ref().map(|f| format!(" in `{f}`")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
    #[error("expression error at column {position}: {message}")]
    Expression { position: usize, message: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            field: Some(field.into()),
            message: message.into(),
        }
    }
}
