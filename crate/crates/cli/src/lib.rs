//! IO companion for the QMDIQKD security-bound engine: file formats,
//! atomic output, and the command implementations behind the `qmdiqkd`
//! binary.

pub mod commands;
pub mod formats;
pub mod io;

/// Process exit codes. 0 means success (and, for `keyrate`, a positive
/// secret-key rate).
pub mod exit_codes {
    /// Secure / all checks passed.
    pub const OK: i32 = 0;
    /// Generic runtime failure (IO and similar).
    pub const FAILURE: i32 = 1;
    /// The pipeline ran but the secret-key rate is zero.
    pub const ZERO_RATE: i32 = 2;
    /// The statistics admit no qubit-source model at the grid resolution.
    pub const INFEASIBLE: i32 = 3;
    /// Bad flags, parameters, or input files.
    pub const USAGE: i32 = 64;
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Usage(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(#[from] formats::FormatError),
    #[error("bound computation failed: {0}")]
    Bound(#[from] qmdiqkd_core::bound::BoundError),
    #[error("channel model rejected parameters: {0}")]
    Channel(#[from] qmdiqkd_core::channel::ChannelError),
    #[error("attack construction failed: {0}")]
    Attack(#[from] qmdiqkd_core::attacks::AttackError),
}

impl CliError {
    /// The exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        use qmdiqkd_core::bound::BoundError;
        match self {
            CliError::Usage(_) | CliError::Format(_) | CliError::Channel(_) => exit_codes::USAGE,
            CliError::Bound(BoundError::InfeasibleStatistics) => exit_codes::INFEASIBLE,
            CliError::Bound(BoundError::ZeroGain) => exit_codes::ZERO_RATE,
            CliError::Bound(_) => exit_codes::USAGE,
            CliError::Io { .. } | CliError::Attack(_) => exit_codes::FAILURE,
        }
    }
}
