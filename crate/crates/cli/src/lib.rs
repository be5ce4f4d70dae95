//! Command implementations behind the `vdwgate` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod record;

pub use commands::{convergence_rows, fidelity, linspace, simulate, solve, sweep, sweep_row, SweepAxis};
pub use config::{OutputFormat, RunConfig};
pub use record::{ResultRecord, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for numeric and output failures, 2 for configuration errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<vdwgate::Error> for CliError {
    fn from(e: vdwgate::Error) -> Self {
        match e {
            vdwgate::Error::Numeric(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
