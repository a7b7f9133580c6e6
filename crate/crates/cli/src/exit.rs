//! Exit codes: 0 success, 1 property failure, 2 parse, 3 dims, 4 covert-infeasible,
//! 5 cap, 6 bad run parameters.

use std::fmt;

use covert_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Property = 1,
    Parse = 2,
    Dims = 3,
    CovertInfeasible = 4,
    Cap = 5,
    RunParameters = 6,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(Code::Parse, message)
    }

    pub fn dims(message: impl Into<String>) -> Self {
        Self::new(Code::Dims, message)
    }

    pub fn run(message: impl Into<String>) -> Self {
        Self::new(Code::RunParameters, message)
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DimMismatch(_) => Code::Dims,
            Error::CovertInfeasible(_) | Error::EmptyFeasibleSet => Code::CovertInfeasible,
            Error::CapExceeded { .. } => Code::Cap,
            Error::InvalidParameter(_) | Error::OrderOutOfRange(_) => Code::RunParameters,
            // Inputs that parse but do not describe valid states, channels or distributions.
            Error::NotHermitian { .. }
            | Error::NotPsd { .. }
            | Error::InvalidState(_)
            | Error::NotCptp { .. }
            | Error::NotADistribution(_)
            | Error::CsiMismatch { .. }
            | Error::SupportViolation(_) => Code::Parse,
            Error::NoConvergence { .. } | Error::EncodingFailure => Code::Property,
        };
        CliError::new(code, e.to_string())
    }
}
