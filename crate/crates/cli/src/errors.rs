//! CLI failure taxonomy and its mapping to process exit codes.
//!
//! Problems with how the program was invoked (bad flags, malformed config
//! or table files, keys that do not apply) exit with code 2. Problems the
//! requested computation itself reports (infeasible sizes, out-of-range
//! probabilities, unwritable output) exit with code 1. Success is 0.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A config-file key that the active subcommand does not understand.
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    /// A key the active subcommand requires but neither a flag nor the
    /// config file supplied.
    #[error("missing required key `{0}`")]
    MissingKey(String),
    /// A key whose value could not be parsed as the expected type.
    #[error("key `{key}`: {detail}")]
    TypeError { key: String, detail: String },
    /// A config or table file that is not syntactically well formed.
    #[error("{path}:{line}: {what}")]
    Malformed { path: String, line: usize, what: String },
    /// Any other invocation-level problem.
    #[error("{0}")]
    Usage(String),
    /// The computation (or an output write) failed; diagnostic verbatim.
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }
}

impl From<relaykey_core::Error> for CliError {
    fn from(e: relaykey_core::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}
