//! Deep deterministic policy gradient learner: exploratory action
//! selection, replay memory, TD-error critic updates and policy-gradient
//! actor updates, with optional slowly tracking target networks.

mod agent;
mod buffer;
mod checkpoint;
mod noise;

pub use agent::{
    critic_input, decode_state, encode_state, soft_update, Agent, AgentConfig, TrainStats,
    INFLATION_SCALE, STATE_DIM,
};
pub use buffer::{ReplayBuffer, Transition};
pub use checkpoint::{Checkpoint, CheckpointManifest, RngPosition, CHECKPOINT_VERSION};
pub use noise::OuNoise;

use thiserror::Error;

use crate::economy::EconomyError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("replay buffer holds {have} transitions, minibatch needs {need}")]
    BufferTooSmall { have: usize, need: usize },
    #[error("non-finite training statistics (critic loss {critic_loss}, actor objective {actor_objective})")]
    NonFinite {
        critic_loss: f64,
        actor_objective: f64,
    },
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint does not match configuration: {0}")]
    CheckpointMismatch(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Economy(#[from] EconomyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AgentError>;
