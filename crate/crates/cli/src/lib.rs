//! Subcommands of the `mazegp` binary, usable in-process.

mod commands;
mod manifest;

pub use commands::{
    cmd_evolve, cmd_explain, cmd_gen_data, cmd_report, load_config, load_datasets, parse_list, read_report,
    EvolveArgs, EvolveOutput, ExplainArgs, GenDataArgs, GenDataOutput, ReportArgs, ReportFile, StepExplanation,
};
pub use manifest::{sha256_hex, RunManifest};

use thiserror::Error;

use mazegp::gp::GpError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("index {index} out of range for {len} trajectories")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::IndexOutOfRange { .. } => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<GpError> for CliError {
    fn from(e: GpError) -> Self {
        match e {
            GpError::Config { .. } => CliError::Config(e.to_string()),
            GpError::Env(_) => CliError::Data(e.to_string()),
            GpError::Dsl(_) | GpError::Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}
