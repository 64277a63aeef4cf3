use serde_json::{json, Value as Json};
use thiserror::Error;

/// Location-carrying parse failure.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{line}:{column}: syntax error: {message} (expected one of: {})", expected.join(", "))]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("type error: {reason} (in `{location}`)")]
pub struct TypeError {
    pub reason: String,
    pub location: String,
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("sample site `{0}` has no finite support")]
    NotEnumerable(String),
    #[error("more than {0} continuous sample sites along one trace")]
    TooManyContinuousSites(usize),
    #[error("step budget of {0} exceeded")]
    StepBudget(u64),
    #[error("nested norm deeper than {0}")]
    NormDepth(usize),
    #[error("higher-order value cannot be represented as a ground point: {0}")]
    HigherOrderUnsupported(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax(_) => "SyntaxError",
            Error::Type(_) => "TypeError",
            Error::NotEnumerable(_) => "NotEnumerable",
            Error::TooManyContinuousSites(_) => "TooManyContinuousSites",
            Error::StepBudget(_) => "StepBudget",
            Error::NormDepth(_) => "NormDepth",
            Error::HigherOrderUnsupported(_) => "HigherOrderUnsupported",
            Error::Internal(_) => "Internal",
        }
    }

    /// Structured diagnostic.
    pub fn to_json(&self) -> Json {
        match self {
            Error::Syntax(e) => json!({
                "error": self.kind(),
                "line": e.line,
                "column": e.column,
                "message": e.message,
                "expected": e.expected,
            }),
            Error::Type(e) => json!({"error": self.kind(), "reason": e.reason, "location": e.location}),
            other => json!({"error": other.kind(), "message": other.to_string()}),
        }
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Error {
        Error::Internal(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
