//! Experiment orchestration: training under the first target, unannounced
//! target changes with and without exploration, experience comparisons,
//! CSV trajectories and summaries.

pub mod criteria;
mod config;
mod record;
mod run;
mod summary;

pub use config::{ExperimentConfig, RunConfig};
pub use record::{
    format_sig12, read_csv, read_csv_file, write_csv, write_csv_file, TrajectoryRecord, CSV_HEADER,
};
pub use run::{
    for_each_seed, level_seed, run_experience_comparison, run_regime_switch, run_training,
    run_training_with, Arm, ExperienceRun, SwitchRun, TrainingOptions, TrainingRun,
};
pub use summary::{summarize, ArmTrajectory, Summary, SummaryRow};

use thiserror::Error;

use crate::ddpg::AgentError;
use crate::economy::EconomyError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("seed {seed}: training diverged: {detail}")]
    NonFinite { seed: u64, detail: String },
    #[error("nothing to summarize")]
    EmptyInput,
    #[error("malformed CSV at row {row}: {message}")]
    MalformedCsv { row: usize, message: String },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Economy(#[from] EconomyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
