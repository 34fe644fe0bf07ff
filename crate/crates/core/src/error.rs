use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants split into two families: problems with the caller's input
/// (see [`Error::is_input_error`]) and numerical failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("undeclared identifier {name} at line {line}, column {column}")]
    UndeclaredIdentifier { name: String, line: usize, column: usize },

    #[error("duplicate group name {0}")]
    DuplicateGroup(String),

    #[error("archive error: {0}")]
    Archive(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("Newton iteration did not converge within {0} iterations")]
    NonConvergence(usize),

    #[error("ill-conditioned rank computation: {0}")]
    IllConditioned(String),

    #[error("slicing group {0} leaves an empty variety")]
    EmptySlice(usize),

    #[error("missing witness entry {0}")]
    MissingEntry(String),

    #[error("path tracking failed: {0}")]
    Tracking(String),

    #[error("indeterminate result: {0}")]
    Indeterminate(String),

    #[error("inconsistent data: {0}")]
    Inconsistent(String),
}

impl Error {
    /// True for errors caused by malformed or inconsistent user input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidArgument(_)
                | Error::Syntax { .. }
                | Error::UndeclaredIdentifier { .. }
                | Error::DuplicateGroup(_)
                | Error::Archive(_)
                | Error::EmptySlice(_)
                | Error::MissingEntry(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
