use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("predicate `{predicate}` expects {expected} argument(s), got {found}")]
    Arity {
        predicate: String,
        expected: usize,
        found: usize,
    },

    #[error("type error: {0}")]
    Type(String),

    #[error("duplicate declaration: {0}")]
    Duplicate(String),

    #[error("variable `{var}` ranges over sort `{sort}`, which has no constants")]
    EmptySort { var: String, sort: String },

    #[error("entity `{0}` has no category label")]
    MissingCategory(String),

    #[error("unknown rule id {0}")]
    UnknownRule(usize),

    #[error("atom {0} is missing from the assignment")]
    AtomMissing(usize),

    #[error("value {value} for {what} is outside [0, 1]")]
    OutOfRange { what: String, value: f64 },

    #[error("component with {found} free atoms exceeds the exact-inference limit of {limit}")]
    TooManyFreeAtoms { found: usize, limit: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Shifts the line number of a parse error; used when a single-line
    /// parser runs inside a multi-line file reader.
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse {
                column, message, ..
            } => Error::Parse {
                line,
                column,
                message,
            },
            other => other,
        }
    }

    /// True for failures that come from an infeasible model or a solver rather
    /// than from malformed input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_) | Error::Solver(_) | Error::TooManyFreeAtoms { .. }
        )
    }
}
