use std::io;

use thiserror::Error;

use crate::session::GameStage;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state index {0} is out of range (expected 0..30)")]
    StateOutOfRange(usize),

    #[error("unknown action code {0} (expected 0, 1 or 2)")]
    UnknownAction(usize),

    /// Document could not be parsed against its schema.
    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },

    /// Document parsed but a value broke an invariant.
    #[error("validation error in {field}: {message}")]
    Validation { field: String, message: String },

    /// Malformed CSV input; `line` is 1-based.
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("unknown personality `{0}`")]
    UnknownPersonality(String),

    #[error("illegal stage transition from {from:?} to {to:?} after {rounds} rounds")]
    IllegalTransition {
        from: GameStage,
        to: GameStage,
        rounds: usize,
    },

    #[error("the session has ended; {0:?} is terminal")]
    TerminalStage(GameStage),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            message: message.to_string(),
        }
    }
}

/// Shortest decimal that reads back as `value` once float noise is trimmed,
/// e.g. `1.1000000000000003` prints as `1.1`.
pub(crate) fn fmt_sum(value: f64) -> String {
    let s = format!("{value:.9}");
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}
