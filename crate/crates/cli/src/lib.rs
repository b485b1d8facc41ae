//! Command-line front end: configuration, pipeline execution and file formats.

pub mod config;
pub mod io;
pub mod run;

pub use config::{Cli, Command, CommandArgs, ReferenceSpec, RunConfig};
pub use run::{run, speedup_model, RunSummary, TimingReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}
