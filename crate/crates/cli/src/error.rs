use std::path::Path;
use std::process::ExitCode;

use rrl_core::ddpg::AgentError;
use rrl_core::nn::NnError;
use rrl_core::HarnessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("I/O failure: {0}")]
    Io(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("missing outputs: {0}")]
    MissingOutputs(String),
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io(_) => 2,
            CliError::BadConfig(_) => 3,
            CliError::MissingOutputs(_) => 4,
            CliError::Run(_) => 5,
        })
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::BadConfig(m) => CliError::BadConfig(m),
            HarnessError::Io(e) => CliError::Io(e.to_string()),
            HarnessError::Csv(e) => CliError::Io(e.to_string()),
            HarnessError::MalformedCsv { .. } => CliError::Io(e.to_string()),
            HarnessError::Agent(a) => a.into(),
            HarnessError::Economy(e) => CliError::BadConfig(e.to_string()),
            other @ (HarnessError::NonFinite { .. } | HarnessError::EmptyInput) => {
                CliError::Run(other.to_string())
            }
        }
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        match e {
            AgentError::Io(e) => CliError::Io(e.to_string()),
            AgentError::Nn(NnError::Io(e)) => CliError::Io(e.to_string()),
            AgentError::InvalidConfig(_)
            | AgentError::CheckpointMismatch(_)
            | AgentError::Json(_)
            | AgentError::Nn(_) => CliError::BadConfig(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
