use std::fmt;

use assurekit::assure::AssureError;
use assurekit::chain::ChainError;
use assurekit::model::{ModelError, ModelFileError};
use assurekit::prop::PropError;
use assurekit::scenario::CalibrationError;
use assurekit::simtest::SimError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    BoundViolated = 1,
    Input = 2,
    Nondeterministic = 3,
    Disagree = 4,
    Internal = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Input,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError {
            exit: Exit::Internal,
            message: message.into(),
        }
    }

    /// Prefix the message with the file or item it concerns.
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

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        let exit = match &e {
            ChainError::NondeterministicState { .. } => Exit::Nondeterministic,
            ChainError::Model(_)
            | ChainError::ConflictingAssignment { .. }
            | ChainError::BranchSum { .. }
            | ChainError::NotStochastic { .. } => Exit::Input,
            _ => Exit::Internal,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}

impl From<PropError> for CliError {
    fn from(e: PropError) -> Self {
        let exit = match &e {
            PropError::NonTerminatingChain { .. }
            | PropError::NumericalNonConvergence { .. }
            | PropError::PathCapExceeded { .. } => Exit::Internal,
            _ => Exit::Input,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<AssureError> for CliError {
    fn from(e: AssureError) -> Self {
        let exit = match &e {
            AssureError::Io { .. } => Exit::Internal,
            _ => Exit::Input,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}
