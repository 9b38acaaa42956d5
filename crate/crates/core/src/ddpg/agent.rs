use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgentError, ReplayBuffer, Result, Transition, OuNoise};
use crate::economy::{ActionBounds, MacroState};
use crate::nn::{Activation, Adam, Mlp};

/// Agent hyperparameters. Every field has a default; config files may
/// override any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    /// Output-layer weights start in `±final_layer_init`.
    pub final_layer_init: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub minibatch: usize,
    pub buffer_capacity: usize,
    pub tau_soft: f64,
    pub use_target_networks: bool,
    pub ou_theta: f64,
    pub ou_dt: f64,
    pub exploration_sigma: f64,
    pub sigma_decay: f64,
    pub sigma_floor: f64,
    pub action_bounds: ActionBounds,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            actor_hidden: vec![64, 64],
            critic_hidden: vec![64, 64],
            final_layer_init: 3e-3,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            minibatch: 64,
            buffer_capacity: 50_000,
            tau_soft: 0.01,
            use_target_networks: true,
            ou_theta: 0.15,
            ou_dt: 1.0,
            exploration_sigma: 0.2,
            sigma_decay: 0.8,
            sigma_floor: 0.002,
            action_bounds: ActionBounds::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(AgentError::InvalidConfig(msg));
        let b = self.action_bounds;
        if !(b.lo < b.hi && b.lo > 0.0) {
            return bad(format!("action bounds [{}, {}] are not a positive interval", b.lo, b.hi));
        }
        if self.minibatch == 0 || self.buffer_capacity < self.minibatch {
            return bad("need 0 < minibatch <= buffer_capacity".into());
        }
        if !(0.0..=1.0).contains(&self.tau_soft) {
            return bad(format!("tau_soft {} outside [0, 1]", self.tau_soft));
        }
        if self.sigma_floor <= 0.0 || self.exploration_sigma < 0.0 {
            return bad("sigma_floor must be positive, exploration_sigma nonnegative".into());
        }
        if !(self.ou_theta > 0.0 && self.ou_dt > 0.0 && self.ou_theta * self.ou_dt < 2.0) {
            return bad("OU recursion must be mean reverting (0 < theta*dt < 2)".into());
        }
        if !(self.sigma_decay > 0.0 && self.sigma_decay <= 1.0) {
            return bad(format!("sigma_decay {} outside (0, 1]", self.sigma_decay));
        }
        if self.actor_lr < 0.0 || self.critic_lr < 0.0 {
            return bad("learning rates must be nonnegative".into());
        }
        Ok(())
    }

    pub fn actor_widths(&self) -> Vec<usize> {
        let mut w = vec![STATE_DIM];
        w.extend(&self.actor_hidden);
        w.push(1);
        w
    }

    pub fn critic_widths(&self) -> Vec<usize> {
        let mut w = vec![STATE_DIM + 1];
        w.extend(&self.critic_hidden);
        w.push(1);
        w
    }

    pub fn actor_output(&self) -> Activation {
        Activation::ScaledSigmoid {
            lo: self.action_bounds.lo,
            hi: self.action_bounds.hi,
        }
    }
}

pub const STATE_DIM: usize = 3;

/// Scale applied to inflation-like quantities before they reach a network.
pub const INFLATION_SCALE: f64 = 10.0;

/// Network-facing encoding of a state:
/// `((pi - 1) * 10, (belief - 1) * 10, (m - 4) / 2)`.
pub fn encode_state(s: &MacroState) -> [f64; STATE_DIM] {
    [
        (s.pi_prev - 1.0) * INFLATION_SCALE,
        (s.belief_prev - 1.0) * INFLATION_SCALE,
        (s.m_prev - 4.0) / 2.0,
    ]
}

/// Inverse of [`encode_state`].
pub fn decode_state(x: &[f64; STATE_DIM]) -> MacroState {
    MacroState::new(
        1.0 + x[0] / INFLATION_SCALE,
        1.0 + x[1] / INFLATION_SCALE,
        4.0 + 2.0 * x[2],
    )
}

/// Critic input: encoded state followed by the action, encoded like a belief.
pub fn critic_input(s: &MacroState, a: f64) -> [f64; STATE_DIM + 1] {
    let e = encode_state(s);
    [e[0], e[1], e[2], (a - 1.0) * INFLATION_SCALE]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Mean squared TD error before the critic update.
    pub critic_loss: f64,
    /// Mean `Q(s, mu(s))` over the minibatch before the actor update.
    pub actor_objective: f64,
}

/// The actor-critic learner.
#[derive(Debug, Clone)]
pub struct Agent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
    pub buffer: ReplayBuffer,
    pub noise: OuNoise,
    pub config: AgentConfig,
    /// Discount factor; the same beta as the household's.
    pub beta: f64,
    pub exploration_enabled: bool,
    pub learning_enabled: bool,
    pub episodes_completed: usize,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) seed: u64,
}

impl Agent {
    pub fn new(config: AgentConfig, beta: f64, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actor = Mlp::random(
            &config.actor_widths(),
            Activation::Tanh,
            config.actor_output(),
            config.final_layer_init,
            &mut rng,
        )?;
        let critic = Mlp::random(
            &config.critic_widths(),
            Activation::Tanh,
            Activation::Linear,
            config.final_layer_init,
            &mut rng,
        )?;
        let noise = OuNoise::new(
            config.ou_theta,
            config.exploration_sigma,
            config.sigma_floor,
            config.sigma_decay,
            config.ou_dt,
        );
        Ok(Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            actor_opt: Adam::with_decays(
                config.actor_lr,
                config.adam_beta1,
                config.adam_beta2,
                config.adam_eps,
            ),
            critic_opt: Adam::with_decays(
                config.critic_lr,
                config.adam_beta1,
                config.adam_beta2,
                config.adam_eps,
            ),
            buffer: ReplayBuffer::new(config.buffer_capacity),
            noise,
            config,
            beta,
            exploration_enabled: true,
            learning_enabled: true,
            episodes_completed: 0,
            rng,
            seed,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bounds(&self) -> ActionBounds {
        self.config.action_bounds
    }

    /// Deterministic policy output, clamped to the action bounds.
    pub fn policy(&self, state: &MacroState) -> Result<f64> {
        let out = self.actor.predict(&encode_state(state))?;
        Ok(self.bounds().clamp(out[0]))
    }

    /// Policy output plus exploration noise (when enabled), clamped.
    pub fn act(&mut self, state: &MacroState) -> Result<f64> {
        let mu = self.actor.predict(&encode_state(state))?[0];
        let a = if self.exploration_enabled {
            mu + self.noise.sample(&mut self.rng)
        } else {
            mu
        };
        Ok(self.bounds().clamp(a))
    }

    pub fn observe(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    /// Marks an episode boundary: noise state resets and its scale decays.
    pub fn end_episode(&mut self) {
        self.noise.reset();
        self.noise.end_episode();
        self.episodes_completed += 1;
    }

    fn eval_nets(&self) -> (&Mlp, &Mlp) {
        if self.config.use_target_networks {
            (&self.actor_target, &self.critic_target)
        } else {
            (&self.actor, &self.critic)
        }
    }

    /// `r + beta * Q'(s', mu'(s'))` with primed networks being the targets
    /// when enabled, otherwise the live networks.
    pub fn td_target(&self, t: &Transition) -> Result<f64> {
        let (actor, critic) = self.eval_nets();
        let a_next = self.bounds().clamp(actor.predict(&encode_state(&t.s_next))?[0]);
        let q_next = critic.predict(&critic_input(&t.s_next, a_next))?[0];
        Ok(t.r + self.beta * q_next)
    }

    /// Mean squared TD error of `batch` against the current critic.
    pub fn critic_loss(&self, batch: &[Transition]) -> Result<f64> {
        let mut total = 0.0;
        for t in batch {
            let y = self.td_target(t)?;
            let q = self.critic.predict(&critic_input(&t.s, t.a))?[0];
            total += (y - q) * (y - q);
        }
        Ok(total / batch.len() as f64)
    }

    /// Accumulates the gradient of the minibatch TD loss into the critic and
    /// returns the loss.
    pub fn critic_gradient(&mut self, batch: &[Transition]) -> Result<f64> {
        let targets = batch
            .iter()
            .map(|t| self.td_target(t))
            .collect::<Result<Vec<_>>>()?;
        let n = batch.len() as f64;
        self.critic.zero_grad();
        let mut loss = 0.0;
        for (t, y) in batch.iter().zip(targets) {
            let q = self.critic.forward(&critic_input(&t.s, t.a))?[0];
            let diff = q - y;
            loss += diff * diff;
            self.critic.backward(&[2.0 * diff / n])?;
        }
        Ok(loss / n)
    }

    /// Accumulates the gradient of `-mean Q(s, mu(s))` into the actor, with
    /// the critic held fixed, and returns `mean Q(s, mu(s))`.
    pub fn actor_gradient(&mut self, batch: &[Transition]) -> Result<f64> {
        let n = batch.len() as f64;
        self.actor.zero_grad();
        let mut objective = 0.0;
        for t in batch {
            let a = self.actor.forward(&encode_state(&t.s))?[0];
            let q = self.critic.forward(&critic_input(&t.s, a))?[0];
            objective += q;
            let dq_da = self.critic.input_gradient(&[1.0])?[STATE_DIM] * INFLATION_SCALE;
            self.actor.backward(&[-dq_da / n])?;
        }
        Ok(objective / n)
    }

    /// One learning update from a uniformly sampled minibatch: a critic
    /// step on the TD loss, an actor step along the deterministic policy
    /// gradient, then soft target updates. Returns `None` when learning is
    /// disabled, leaving the agent untouched.
    pub fn train_step(&mut self) -> Result<Option<TrainStats>> {
        if !self.learning_enabled {
            return Ok(None);
        }
        let need = self.config.minibatch;
        if self.buffer.len() < need {
            return Err(AgentError::BufferTooSmall {
                have: self.buffer.len(),
                need,
            });
        }
        let batch = self.buffer.sample(&mut self.rng, need);
        let critic_loss = self.critic_gradient(&batch)?;
        self.critic_opt.apply_gradients(&mut self.critic);
        let actor_objective = self.actor_gradient(&batch)?;
        self.actor_opt.apply_gradients(&mut self.actor);
        if self.config.use_target_networks {
            let tau = self.config.tau_soft;
            soft_update(&self.actor, &mut self.actor_target, tau)?;
            soft_update(&self.critic, &mut self.critic_target, tau)?;
        }
        if !critic_loss.is_finite() || !actor_objective.is_finite() {
            return Err(AgentError::NonFinite {
                critic_loss,
                actor_objective,
            });
        }
        Ok(Some(TrainStats {
            critic_loss,
            actor_objective,
        }))
    }
}

/// `target <- tau * live + (1 - tau) * target`.
pub fn soft_update(live: &Mlp, target: &mut Mlp, tau: f64) -> Result<()> {
    target.blend_from(live, tau)?;
    Ok(())
}
