use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("death before birth at line {line}")]
    DeathBeforeBirth { line: usize },

    #[error("invalid point ({birth}, {persistence}): {msg}")]
    InvalidPoint {
        birth: f64,
        persistence: f64,
        msg: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid parameter `{name}`: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("configuration is not stability-compliant: {0}")]
    NonCompliant(String),

    #[error(
        "triangle budget exceeded: {count} triangles under cap {cap}, budget {budget}; \
         reduce the cap to at most {suggested_cap}"
    )]
    BudgetExceeded {
        count: usize,
        budget: usize,
        cap: f64,
        suggested_cap: f64,
    },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, msg: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        msg: msg.into(),
    }
}
