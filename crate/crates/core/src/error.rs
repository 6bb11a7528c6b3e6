use crate::model::Var;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("assignment is missing variable {0}")]
    MissingVariable(Var),

    #[error("spin value {value} for variable {var} is not +1 or -1")]
    InvalidSpin { var: Var, value: i64 },

    #[error("{count} variables exceed the enumeration cap of {cap}")]
    TooManyVariables { count: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid embedding: {}", format_violations(.0))]
    InvalidEmbedding(Vec<crate::embedding::Violation>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no chain strength reached the plateau threshold {threshold}")]
    NoPlateau { threshold: f64 },

    #[error("p_opt requested without a ground-state oracle")]
    MissingOracle,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[crate::embedding::Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
