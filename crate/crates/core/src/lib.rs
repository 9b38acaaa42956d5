//! Inflation-expectation learning in a closed-form monetary economy.
//!
//! An actor-critic agent forms a one-period-ahead inflation belief each
//! period; the economy maps that belief to a nominal rate, money holdings
//! and realized inflation, and rewards the agent with its negative absolute
//! forecast error. The [`harness`] trains agents under one inflation target,
//! switches the target without telling them, and records how they adapt.

pub mod ddpg;
pub mod economy;
pub mod harness;
pub mod nn;

pub use ddpg::{Agent, AgentConfig, AgentError, Checkpoint, OuNoise, ReplayBuffer, Transition};
pub use economy::{ActionBounds, EconomyError, MacroState, Regime, SteadyState, StepOutcome};
pub use harness::{ArmTrajectory, ExperimentConfig, HarnessError, Summary, TrajectoryRecord};
pub use nn::{Activation, Adam, Mlp, NnError};
