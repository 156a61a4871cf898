//! Exit statuses and the error type carried to `main`.

use std::fmt;

use lmes_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Parse = 2,
    Bracket = 3,
    NonConvergence = 4,
    Internal = 5,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn new(status: Status, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Bad user input maps to the parse status, a bracket that does not
/// straddle the transition to its own status, everything else is internal.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::InvalidSpec(_)
        | Error::QubitOutOfRange { .. }
        | Error::InvalidParameter { .. }
        | Error::NonRegular(_)
        | Error::UnknownColor { .. }
        | Error::DimensionCap { .. }
        | Error::NotStochastic(_)
        | Error::Decomposition(_)
        | Error::Schedule(_)
        | Error::Parse(_) => Status::Parse,
        Error::Bracket { .. } => Status::Bracket,
        _ => Status::Internal,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(status_of(&e), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(Status::Internal, format!("i/o: {e}"))
    }
}
