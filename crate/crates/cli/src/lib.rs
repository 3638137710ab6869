//! File formats, exporters, and helpers for the `sbcn` command-line
//! front end. All solver logic lives in `sbcn-core`; this crate only
//! does IO.

pub mod export;
pub mod format;

use std::fmt;

/// Errors split by exit code: user-facing validation and infeasibility
/// problems exit with 2, internal failures with 1.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "error: {}", msg),
            CliError::Internal(msg) => write!(f, "internal error: {}", msg),
        }
    }
}

impl std::error::Error for CliError {}

pub fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn internal(msg: impl Into<String>) -> CliError {
    CliError::Internal(msg.into())
}

/// Bit budget for ASSR assembly: `SBCN_OPT_BITBUDGET` or the default.
pub fn bit_budget() -> Result<u32, CliError> {
    match std::env::var("SBCN_OPT_BITBUDGET") {
        Ok(s) => s
            .trim()
            .parse::<u32>()
            .map_err(|_| validation(format!("SBCN_OPT_BITBUDGET is not a number: `{}`", s))),
        Err(std::env::VarError::NotPresent) => Ok(sbcn_core::model::DEFAULT_BIT_BUDGET),
        Err(e) => Err(validation(format!("SBCN_OPT_BITBUDGET: {}", e))),
    }
}
