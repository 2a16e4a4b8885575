//! Command-line front end for `srwpnet`: run configuration files, numeric
//! grids, and the `density`, `rate`, `simulate` and `validate` commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod grid;

pub use commands::{cmd_density, cmd_rate, cmd_simulate, cmd_validate, Check, Outcome};
pub use config::{ConfigError, RunConfig};
pub use grid::Grid;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] srwpnet::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical or output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(srwpnet::Error::Config(_) | srwpnet::Error::Divergence { .. }) => 2,
            CliError::Core(_) | CliError::Output(_) => 3,
        }
    }
}
