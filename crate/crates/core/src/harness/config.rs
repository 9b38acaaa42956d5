use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::ddpg::AgentConfig;
use crate::economy::Regime;

/// Everything one experiment needs. Parsed from TOML; unknown keys are
/// rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub regime_before: Regime,
    pub regime_after: Regime,
    pub run: RunConfig,
    pub agent: AgentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Training episodes under the first regime.
    pub episodes: usize,
    pub periods_per_episode: usize,
    /// Periods simulated under the first regime at the start of a switch run
    /// before the target changes.
    pub switch_period: usize,
    /// Episodes simulated after the switch.
    pub post_switch_episodes: usize,
    pub seeds: Vec<u64>,
    /// Exploration after the switch. Off means the frozen control arm.
    pub exploration: bool,
    pub learning_after_switch: bool,
    /// Half-width of the uniform jitter on the initial `pi_prev` and
    /// `belief_prev`.
    pub initial_perturbation: f64,
    /// Training lengths compared by the experience experiment.
    pub experience_levels: Vec<usize>,
    /// Window for rolling means and terminal statistics.
    pub window: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            episodes: 20,
            periods_per_episode: 500,
            switch_period: 100,
            post_switch_episodes: 10,
            seeds: vec![1, 2, 3, 4, 5],
            exploration: true,
            learning_after_switch: true,
            initial_perturbation: 0.05,
            experience_levels: vec![5, 10, 15, 20],
            window: 100,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            regime_before: Regime::target_one(),
            regime_after: Regime::target_two(),
            run: RunConfig::default(),
            agent: AgentConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::BadConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::BadConfig(m));
        for (name, r) in [("regime_before", &self.regime_before), ("regime_after", &self.regime_after)] {
            if let Err(e) = r.validate() {
                return bad(format!("{name}: {e}"));
            }
        }
        if self.regime_before.beta != self.regime_after.beta {
            return bad("the agent's discount factor must equal beta in both regimes".into());
        }
        if let Err(e) = self.agent.validate() {
            return bad(e.to_string());
        }
        let b = self.agent.action_bounds;
        for (name, r) in [("regime_before", &self.regime_before), ("regime_after", &self.regime_after)] {
            if b.lo <= r.beta {
                return bad(format!(
                    "{name}: action lower bound {} must exceed beta {} so the nominal rate stays above 1",
                    b.lo, r.beta
                ));
            }
            if !b.contains(r.pi_hat) {
                return bad(format!("{name}: target {} outside the action bounds", r.pi_hat));
            }
        }
        let run = &self.run;
        if run.episodes == 0 || run.periods_per_episode == 0 {
            return bad("episodes and periods_per_episode must be at least 1".into());
        }
        if run.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if run.window == 0 || run.window > run.periods_per_episode {
            return bad("window must lie in 1..=periods_per_episode".into());
        }
        let horizon = run.switch_period + run.post_switch_episodes * run.periods_per_episode;
        if run.switch_period == 0 || run.switch_period >= horizon {
            return bad(format!(
                "switch_period {} must fall inside the simulated horizon of {horizon} periods",
                run.switch_period
            ));
        }
        if !(run.initial_perturbation >= 0.0) {
            return bad("initial_perturbation must be nonnegative".into());
        }
        if run.experience_levels.iter().any(|&l| l == 0) {
            return bad("experience levels must be at least one episode".into());
        }
        Ok(())
    }

    pub fn regimes(&self) -> [Regime; 2] {
        [self.regime_before, self.regime_after]
    }

    /// Total periods of a switch run.
    pub fn switch_horizon(&self) -> usize {
        self.run.switch_period + self.run.post_switch_episodes * self.run.periods_per_episode
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_baseline() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.regime_before.lambda, -0.5);
        assert_eq!(cfg.regime_before.beta, 0.8);
        assert_eq!(cfg.agent.exploration_sigma, 0.2);
    }

    #[test]
    fn roundtrips_through_toml() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_toml("[agent]\nactor_lrr = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("actor_lrr"), "{err}");
        assert!(ExperimentConfig::from_toml("bogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("[run]\nepisodes = 3\nfoo = 1\n").is_err());
    }

    #[test]
    fn degenerate_exponent_rejected() {
        let text = "[regime_before]\npi_hat = 1.0\nlambda = -1.0\nbeta = 0.8\n";
        let err = ExperimentConfig::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("degenerate exponent"), "{err}");
    }

    #[test]
    fn partial_override() {
        let cfg = ExperimentConfig::from_toml(
            "[run]\nepisodes = 2\nseeds = [9]\n[agent]\nuse_target_networks = false\n",
        )
        .unwrap();
        assert_eq!(cfg.run.episodes, 2);
        assert_eq!(cfg.run.seeds, vec![9]);
        assert!(!cfg.agent.use_target_networks);
        assert_eq!(cfg.run.periods_per_episode, 500);
    }

    #[test]
    fn mismatched_beta_rejected() {
        let text = "[regime_after]\npi_hat = 1.1\nlambda = -0.5\nbeta = 0.9\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
    }
}
