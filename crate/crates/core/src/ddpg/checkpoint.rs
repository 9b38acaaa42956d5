//! Agent snapshots on disk.
//!
//! A checkpoint directory holds the four networks in the `RRL1` blob format
//! (`actor`, `critic`, `actor_target`, `critic_target`, each `.bin` + `.json`)
//! and `checkpoint.json` with everything else needed to resume: config,
//! noise state, optimizer moments and the RNG stream position. The replay
//! buffer is not saved; a resumed agent starts with empty memory.

use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{Agent, AgentConfig, AgentError, OuNoise, ReplayBuffer, Result};
use crate::nn::{Adam, Mlp};

pub const CHECKPOINT_VERSION: u32 = 1;
const MANIFEST_FILE: &str = "checkpoint.json";
const NETWORKS: [&str; 4] = ["actor", "critic", "actor_target", "critic_target"];

/// Exact position of a ChaCha stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngPosition {
    /// 32-byte key, hex encoded.
    pub key: String,
    pub stream: u64,
    /// 128-bit word position, decimal.
    pub word_pos: String,
}

impl RngPosition {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            key: rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        let bad = || AgentError::CheckpointMismatch(format!("malformed rng position {self:?}"));
        if self.key.len() != 64 {
            return Err(bad());
        }
        let mut key = [0u8; 32];
        for (k, byte) in key.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&self.key[2 * k..2 * k + 2], 16).map_err(|_| bad())?;
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos.parse::<u128>().map_err(|_| bad())?);
        Ok(rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointManifest {
    pub version: u32,
    pub seed: u64,
    pub beta: f64,
    pub episodes_completed: usize,
    pub config: AgentConfig,
    pub noise: OuNoise,
    pub rng: RngPosition,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
    pub networks: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub manifest: CheckpointManifest,
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
}

impl Checkpoint {
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (stem, net) in NETWORKS.iter().zip(self.networks()) {
            net.save(dir, stem)?;
        }
        fs::write(
            dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(&self.manifest)?,
        )?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: CheckpointManifest =
            serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
        if manifest.version != CHECKPOINT_VERSION {
            return Err(AgentError::CheckpointMismatch(format!(
                "unsupported checkpoint version {}",
                manifest.version
            )));
        }
        let cp = Self {
            actor: Mlp::load(dir, NETWORKS[0])?,
            critic: Mlp::load(dir, NETWORKS[1])?,
            actor_target: Mlp::load(dir, NETWORKS[2])?,
            critic_target: Mlp::load(dir, NETWORKS[3])?,
            manifest,
        };
        cp.check_architecture(&cp.manifest.config)?;
        Ok(cp)
    }

    fn networks(&self) -> [&Mlp; 4] {
        [&self.actor, &self.critic, &self.actor_target, &self.critic_target]
    }

    /// Errors unless every network has the widths and output activation
    /// that `config` prescribes.
    pub fn check_architecture(&self, config: &AgentConfig) -> Result<()> {
        let widths = |net: &Mlp| {
            let mut w = vec![net.input_dim()];
            w.extend(net.layers().iter().map(|l| l.spec().outputs));
            w
        };
        let expect_actor = config.actor_widths();
        let expect_critic = config.critic_widths();
        for (name, net, expect) in [
            ("actor", &self.actor, &expect_actor),
            ("actor_target", &self.actor_target, &expect_actor),
            ("critic", &self.critic, &expect_critic),
            ("critic_target", &self.critic_target, &expect_critic),
        ] {
            if widths(net) != *expect {
                return Err(AgentError::CheckpointMismatch(format!(
                    "{name} has widths {:?}, config expects {:?}",
                    widths(net),
                    expect
                )));
            }
        }
        let out = self.actor.layers().last().expect("non-empty").spec().activation;
        if out != config.actor_output() {
            return Err(AgentError::CheckpointMismatch(format!(
                "actor output activation {out:?} does not match action bounds"
            )));
        }
        Ok(())
    }
}

impl Agent {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            manifest: CheckpointManifest {
                version: CHECKPOINT_VERSION,
                seed: self.seed,
                beta: self.beta,
                episodes_completed: self.episodes_completed,
                config: self.config.clone(),
                noise: self.noise.clone(),
                rng: RngPosition::capture(&self.rng),
                actor_opt: self.actor_opt.clone(),
                critic_opt: self.critic_opt.clone(),
                networks: NETWORKS.iter().map(|s| s.to_string()).collect(),
            },
            actor: self.actor.clone(),
            critic: self.critic.clone(),
            actor_target: self.actor_target.clone(),
            critic_target: self.critic_target.clone(),
        }
    }

    /// Rebuilds an agent from `cp` with an empty replay buffer. Exploration
    /// and learning start enabled.
    pub fn from_checkpoint(cp: &Checkpoint) -> Result<Self> {
        let m = &cp.manifest;
        m.config.validate()?;
        cp.check_architecture(&m.config)?;
        Ok(Self {
            actor: cp.actor.clone(),
            critic: cp.critic.clone(),
            actor_target: cp.actor_target.clone(),
            critic_target: cp.critic_target.clone(),
            actor_opt: m.actor_opt.clone(),
            critic_opt: m.critic_opt.clone(),
            buffer: ReplayBuffer::new(m.config.buffer_capacity),
            noise: m.noise.clone(),
            config: m.config.clone(),
            beta: m.beta,
            exploration_enabled: true,
            learning_enabled: true,
            episodes_completed: m.episodes_completed,
            rng: m.rng.restore()?,
            seed: m.seed,
        })
    }
}
