use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ExperimentConfig, HarnessError, Result, TrajectoryRecord};
use crate::ddpg::{Agent, Checkpoint, TrainStats, Transition};
use crate::economy::{self, MacroState, Regime};

const TRAINING_STREAM: u64 = 1;
const SWITCH_STREAM: u64 = 2;

/// Environment randomness (initial-state jitter) for `seed`. Shares the key
/// with the agent's generator but draws from a separate ChaCha stream.
fn env_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Agent seed for one experience level, distinct from every other level.
pub fn level_seed(seed: u64, level: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(level as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingOptions {
    pub episodes: usize,
    pub exploration: bool,
    pub learning: bool,
}

impl TrainingOptions {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self {
            episodes: config.run.episodes,
            exploration: true,
            learning: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub seed: u64,
    pub records: Vec<TrajectoryRecord>,
    pub checkpoint: Checkpoint,
}

/// Flags applied to the agent once the target has changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arm {
    pub exploration: bool,
    pub learning: bool,
}

impl Arm {
    pub const EXPLORE: Arm = Arm {
        exploration: true,
        learning: true,
    };
    pub const FROZEN: Arm = Arm {
        exploration: false,
        learning: false,
    };

    pub fn from_config(config: &ExperimentConfig) -> Self {
        if config.run.exploration {
            Arm {
                exploration: true,
                learning: config.run.learning_after_switch,
            }
        } else {
            Arm::FROZEN
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.exploration, self.learning) {
            (true, true) => "explore",
            (false, false) => "frozen",
            (true, false) => "explore-nolearn",
            (false, true) => "learn-noexplore",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SwitchRun {
    pub seed: u64,
    pub arm: Arm,
    pub records: Vec<TrajectoryRecord>,
}

impl SwitchRun {
    /// Index of the first post-switch record.
    pub fn switch_index(&self) -> usize {
        self.records
            .iter()
            .position(|r| r.regime_id == 1)
            .unwrap_or(self.records.len())
    }
}

#[derive(Debug, Clone)]
pub struct ExperienceRun {
    pub level: usize,
    pub seed: u64,
    pub switch: SwitchRun,
}

struct Period {
    action: f64,
    outcome: economy::StepOutcome,
    stats: Option<TrainStats>,
}

/// Steps II and III for one period.
fn simulate_period(agent: &mut Agent, state: &MacroState, regime: &Regime, seed: u64) -> Result<Period> {
    let action = agent.act(state)?;
    let outcome = economy::step(state, action, regime)?;
    agent.observe(Transition {
        s: *state,
        a: action,
        r: outcome.reward,
        s_next: outcome.next_state,
    });
    let stats = if agent.learning_enabled && agent.buffer.len() >= agent.config.minibatch {
        agent.train_step().map_err(|e| match e {
            crate::ddpg::AgentError::NonFinite { .. } => HarnessError::NonFinite {
                seed,
                detail: e.to_string(),
            },
            other => other.into(),
        })?
    } else {
        None
    };
    Ok(Period {
        action,
        outcome,
        stats,
    })
}

fn record(
    seed: u64,
    episode: usize,
    period: usize,
    regime_id: usize,
    agent: &Agent,
    p: &Period,
) -> TrajectoryRecord {
    let stats = p.stats.unwrap_or(TrainStats {
        critic_loss: 0.0,
        actor_objective: 0.0,
    });
    TrajectoryRecord {
        seed,
        episode,
        period,
        regime_id,
        belief: p.action,
        pi: p.outcome.pi,
        i: p.outcome.i,
        m: p.outcome.m,
        reward: p.outcome.reward,
        sigma: if agent.exploration_enabled {
            agent.noise.sigma
        } else {
            0.0
        },
        critic_loss: stats.critic_loss,
        actor_objective: stats.actor_objective,
    }
}

/// Trains a fresh agent under the first regime with the configured number
/// of episodes.
pub fn run_training(config: &ExperimentConfig, seed: u64) -> Result<TrainingRun> {
    run_training_with(config, seed, TrainingOptions::from_config(config))
}

/// Trains a fresh agent under `regime_before`. Every episode restarts from
/// the jittered steady state; the replay memory persists across episodes.
/// `period` in the records counts from the start of training.
pub fn run_training_with(
    config: &ExperimentConfig,
    seed: u64,
    opts: TrainingOptions,
) -> Result<TrainingRun> {
    train_agent(config, seed, seed, opts)
}

fn train_agent(
    config: &ExperimentConfig,
    record_seed: u64,
    agent_seed: u64,
    opts: TrainingOptions,
) -> Result<TrainingRun> {
    config.validate()?;
    let regime = config.regime_before;
    let mut agent = Agent::new(config.agent.clone(), regime.beta, agent_seed)?;
    agent.exploration_enabled = opts.exploration;
    agent.learning_enabled = opts.learning;
    let mut env = env_rng(agent_seed, TRAINING_STREAM);
    let bounds = agent.bounds();
    let periods = config.run.periods_per_episode;
    let mut records = Vec::with_capacity(opts.episodes * periods);
    for episode in 0..opts.episodes {
        let mut state =
            economy::initial_state(&regime, &bounds, config.run.initial_perturbation, &mut env)?;
        for p in 0..periods {
            let period = simulate_period(&mut agent, &state, &regime, record_seed)?;
            records.push(record(
                record_seed,
                episode,
                episode * periods + p,
                0,
                &agent,
                &period,
            ));
            state = period.outcome.next_state;
        }
        agent.end_episode();
    }
    Ok(TrainingRun {
        seed: record_seed,
        records,
        checkpoint: agent.checkpoint(),
    })
}

/// Resumes `checkpoint` and changes the inflation target without telling
/// the agent.
///
/// The run starts at the jittered steady state of `regime_before` and
/// simulates `switch_period` periods with exploration and learning off, so
/// every arm from the same checkpoint and seed shares that segment exactly.
/// From `switch_period` on, `regime_after` is in force and the arm's flags
/// apply; every `periods_per_episode` periods after the switch count as an
/// episode boundary for the exploration noise. The economy is never reset
/// during the run.
pub fn run_regime_switch(
    checkpoint: &Checkpoint,
    config: &ExperimentConfig,
    seed: u64,
    arm: Arm,
) -> Result<SwitchRun> {
    config.validate()?;
    checkpoint
        .check_architecture(&config.agent)
        .map_err(|e| HarnessError::BadConfig(e.to_string()))?;
    let mut agent = Agent::from_checkpoint(checkpoint)?;
    agent.exploration_enabled = false;
    agent.learning_enabled = false;
    let mut env = env_rng(seed, SWITCH_STREAM);
    let bounds = agent.bounds();
    let mut state = economy::initial_state(
        &config.regime_before,
        &bounds,
        config.run.initial_perturbation,
        &mut env,
    )?;
    let periods = config.run.periods_per_episode;
    let switch_at = config.run.switch_period;
    let horizon = config.switch_horizon();
    let mut records = Vec::with_capacity(horizon);
    for t in 0..horizon {
        if t == switch_at {
            agent.exploration_enabled = arm.exploration;
            agent.learning_enabled = arm.learning;
        } else if t > switch_at && (t - switch_at) % periods == 0 {
            agent.end_episode();
        }
        let (regime, regime_id, episode) = if t < switch_at {
            (&config.regime_before, 0, 0)
        } else {
            (&config.regime_after, 1, 1 + (t - switch_at) / periods)
        };
        let period = simulate_period(&mut agent, &state, regime, seed)?;
        records.push(record(seed, episode, t, regime_id, &agent, &period));
        state = period.outcome.next_state;
    }
    Ok(SwitchRun { seed, arm, records })
}

/// For every experience level, trains a separate agent for that many
/// episodes and runs the exploring arm through the same target change.
pub fn run_experience_comparison(
    config: &ExperimentConfig,
    levels: &[usize],
    seed: u64,
) -> Result<Vec<ExperienceRun>> {
    levels
        .iter()
        .map(|&level| {
            let opts = TrainingOptions {
                episodes: level,
                exploration: true,
                learning: true,
            };
            let trained = train_agent(config, seed, level_seed(seed, level), opts)?;
            let switch = run_regime_switch(&trained.checkpoint, config, seed, Arm::EXPLORE)?;
            Ok(ExperienceRun {
                level,
                seed,
                switch,
            })
        })
        .collect()
}

/// Runs `f` for every seed on the current rayon pool, keeping seed order.
pub fn for_each_seed<T, F>(seeds: &[u64], f: F) -> Vec<(u64, Result<T>)>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    seeds.par_iter().map(|&s| (s, f(s))).collect()
}
