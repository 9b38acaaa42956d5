//! Closed-form monetary economy.
//!
//! A representative household with log utility over consumption and real
//! money balances, a passive (or active) interest-rate rule, and a
//! balanced government budget. Given the agent's one-period-ahead inflation
//! belief, the Euler equation pins the nominal rate, money demand follows
//! from the rate, and the policy rule is inverted for realized inflation.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconomyError {
    #[error("belief {belief} must exceed the discount factor {beta} (nominal rate would be <= 1)")]
    BeliefTooLow { belief: f64, beta: f64 },
    #[error("nominal rate {rate} must be above unity for money demand to be defined")]
    RateNotAboveUnity { rate: f64 },
    #[error("degenerate exponent: 1 + lambda = 0 (lambda = {lambda})")]
    DegenerateExponent { lambda: f64 },
    #[error("invalid regime: {0}")]
    InvalidRegime(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, EconomyError>;

/// Monetary policy regime and household preference constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    /// Gross inflation target.
    pub pi_hat: f64,
    /// Rule responsiveness offset; negative is passive policy.
    pub lambda: f64,
    /// Discount factor.
    pub beta: f64,
    /// Weight on money in utility.
    #[serde(default = "one")]
    pub gamma: f64,
    /// Consumption (= endowment) each period.
    #[serde(default = "one")]
    pub consumption: f64,
}

fn one() -> f64 {
    1.0
}

impl Regime {
    pub fn new(pi_hat: f64, lambda: f64, beta: f64) -> Result<Self> {
        let regime = Self {
            pi_hat,
            lambda,
            beta,
            gamma: 1.0,
            consumption: 1.0,
        };
        regime.validate()?;
        Ok(regime)
    }

    /// Price-stationary baseline: target 1.0, lambda -0.5, beta 0.8.
    pub fn target_one() -> Self {
        Self::new(1.0, -0.5, 0.8).expect("baseline regime is valid")
    }

    /// Inflation-stationary regime: target 1.1, lambda -0.5, beta 0.8.
    pub fn target_two() -> Self {
        Self::new(1.1, -0.5, 0.8).expect("baseline regime is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.pi_hat, self.lambda, self.beta, self.gamma, self.consumption]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(EconomyError::InvalidRegime("non-finite parameter".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(EconomyError::InvalidRegime(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if self.pi_hat <= 0.0 {
            return Err(EconomyError::InvalidRegime(format!(
                "pi_hat must be positive, got {}",
                self.pi_hat
            )));
        }
        if self.gamma <= 0.0 || self.consumption <= 0.0 {
            return Err(EconomyError::InvalidRegime(
                "gamma and consumption must be positive".into(),
            ));
        }
        if 1.0 + self.lambda == 0.0 {
            return Err(EconomyError::DegenerateExponent {
                lambda: self.lambda,
            });
        }
        Ok(())
    }

    pub fn is_passive(&self) -> bool {
        self.lambda < 0.0
    }
}

/// Closed interval the agent's belief is clamped to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self { lo: 0.9, hi: 1.4 }
    }
}

impl ActionBounds {
    pub fn clamp(&self, a: f64) -> f64 {
        a.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, a: f64) -> bool {
        a >= self.lo && a <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// What the agent observes at the start of a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    /// Realized gross inflation last period.
    pub pi_prev: f64,
    /// The belief formed last period about this period's inflation.
    pub belief_prev: f64,
    /// Real money balances last period.
    pub m_prev: f64,
}

impl MacroState {
    pub fn new(pi_prev: f64, belief_prev: f64, m_prev: f64) -> Self {
        Self {
            pi_prev,
            belief_prev,
            m_prev,
        }
    }

    pub fn validate(&self, bounds: &ActionBounds) -> Result<()> {
        let ok = [self.pi_prev, self.belief_prev, self.m_prev]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !ok {
            return Err(EconomyError::InvalidState(format!(
                "all fields must be finite and positive: {self:?}"
            )));
        }
        if !bounds.contains(self.belief_prev) {
            return Err(EconomyError::InvalidState(format!(
                "belief_prev {} outside [{}, {}]",
                self.belief_prev, bounds.lo, bounds.hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// Gross nominal interest rate.
    pub i: f64,
    /// Real money balances.
    pub m: f64,
    /// Realized gross inflation.
    pub pi: f64,
    pub reward: f64,
    pub next_state: MacroState,
    /// Government transfer implied by the balanced budget. Diagnostic only.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub pi: f64,
    pub i: f64,
    pub m: f64,
}

/// Nominal rate consistent with the Euler equation at constant consumption:
/// `beta * i = belief`.
pub fn euler_rate(belief: f64, regime: &Regime) -> Result<f64> {
    if !(belief > regime.beta) {
        return Err(EconomyError::BeliefTooLow {
            belief,
            beta: regime.beta,
        });
    }
    Ok(belief / regime.beta)
}

/// Log-utility money demand, `gamma * c / m = 1 - 1/i`.
pub fn money_demand(i: f64, consumption: f64, gamma: f64) -> Result<f64> {
    if !(i > 1.0) {
        return Err(EconomyError::RateNotAboveUnity { rate: i });
    }
    Ok(gamma * consumption * i / (i - 1.0))
}

/// Inflation that makes the interest-rate rule deliver rate `i`.
pub fn realized_inflation(i: f64, regime: &Regime) -> Result<f64> {
    let exp_base = 1.0 + regime.lambda;
    if exp_base == 0.0 {
        return Err(EconomyError::DegenerateExponent {
            lambda: regime.lambda,
        });
    }
    if !(i > 0.0) {
        return Err(EconomyError::RateNotAboveUnity { rate: i });
    }
    Ok((i * regime.beta / regime.pi_hat).powf(1.0 / exp_base) * regime.pi_hat)
}

/// Negative absolute forecast error.
pub fn reward(belief_prev: f64, pi_realized: f64) -> f64 {
    -(belief_prev - pi_realized).abs()
}

/// Advance the economy one period given this period's belief (`action`).
pub fn step(state: &MacroState, action: f64, regime: &Regime) -> Result<StepOutcome> {
    let i = euler_rate(action, regime)?;
    let m = money_demand(i, regime.consumption, regime.gamma)?;
    let pi = realized_inflation(i, regime)?;
    let r = reward(state.belief_prev, pi);
    let tau = m - state.m_prev / pi;
    Ok(StepOutcome {
        i,
        m,
        pi,
        reward: r,
        next_state: MacroState::new(pi, action, m),
        tau,
    })
}

/// Rational-expectations fixed point of the regime.
pub fn steady_state(regime: &Regime) -> Result<SteadyState> {
    let i = euler_rate(regime.pi_hat, regime)?;
    let m = money_demand(i, regime.consumption, regime.gamma)?;
    Ok(SteadyState {
        pi: regime.pi_hat,
        i,
        m,
    })
}

/// Steady state of `regime` with `pi_prev` and `belief_prev` perturbed
/// uniformly by up to `perturbation`. The belief stays inside `bounds`.
pub fn initial_state<R: Rng + ?Sized>(
    regime: &Regime,
    bounds: &ActionBounds,
    perturbation: f64,
    rng: &mut R,
) -> Result<MacroState> {
    let ss = steady_state(regime)?;
    let mut jitter = || {
        if perturbation > 0.0 {
            rng.gen_range(-perturbation..=perturbation)
        } else {
            0.0
        }
    };
    let pi_prev = ss.pi + jitter();
    let belief_prev = bounds.clamp(ss.pi + jitter());
    let state = MacroState::new(pi_prev, belief_prev, ss.m);
    state.validate(bounds)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn euler_rate_examples() {
        let r = Regime::target_one();
        assert!(close(euler_rate(1.0, &r).unwrap(), 1.25, 1e-15));
        assert!(close(euler_rate(1.1, &r).unwrap(), 1.375, 1e-15));
        assert!(matches!(
            euler_rate(0.8, &r),
            Err(EconomyError::BeliefTooLow { .. })
        ));
    }

    #[test]
    fn money_demand_examples() {
        assert!(close(money_demand(1.25, 1.0, 1.0).unwrap(), 5.0, 1e-14));
        assert!(close(money_demand(1.375, 1.0, 1.0).unwrap(), 11.0 / 3.0, 1e-14));
        assert_eq!(money_demand(2.0, 1.0, 1.0).unwrap(), 2.0);
        assert!(matches!(
            money_demand(1.0, 1.0, 1.0),
            Err(EconomyError::RateNotAboveUnity { .. })
        ));
    }

    #[test]
    fn realized_inflation_examples() {
        let one = Regime::target_one();
        let two = Regime::target_two();
        assert!(close(realized_inflation(1.25, &one).unwrap(), 1.0, 1e-14));
        assert!(close(realized_inflation(1.375, &one).unwrap(), 1.21, 1e-14));
        assert!(close(
            realized_inflation(1.25, &two).unwrap(),
            1.0 / 1.1,
            1e-14
        ));
        let degenerate = Regime {
            lambda: -1.0,
            ..one
        };
        assert!(matches!(
            realized_inflation(1.25, &degenerate),
            Err(EconomyError::DegenerateExponent { .. })
        ));
    }

    #[test]
    fn reward_examples() {
        assert_eq!(reward(1.0, 1.0), 0.0);
        assert!(close(reward(1.0, 1.21), -0.21, 1e-14));
        assert!(close(reward(1.1, 1.0), -0.1, 1e-14));
    }

    #[test]
    fn step_examples() {
        let one = Regime::target_one();
        let s = MacroState::new(1.02, 0.97, 5.1);
        let out = step(&s, 1.0, &one).unwrap();
        assert!(close(out.i, 1.25, 1e-15));
        assert!(close(out.m, 5.0, 1e-14));
        assert!(close(out.pi, 1.0, 1e-14));
        assert!(close(out.reward, -0.03, 1e-12));
        assert_eq!(out.next_state, MacroState::new(out.pi, 1.0, out.m));

        let two = Regime::target_two();
        let out = step(&s, 1.1, &two).unwrap();
        assert!(close(out.i, 1.375, 1e-15));
        assert!((out.m - 3.667).abs() < 1e-3);
        assert!(close(out.pi, 1.1, 1e-14));

        let s = MacroState::new(1.0, 1.0, 5.0);
        let out = step(&s, 1.1, &one).unwrap();
        assert!(close(out.pi, 1.21, 1e-14));
        assert!(close(out.reward, -0.21, 1e-12));
        assert!(close(out.tau, out.m - 5.0 / out.pi, 1e-15));
    }

    #[test]
    fn steady_state_examples() {
        let ss = steady_state(&Regime::target_one()).unwrap();
        assert_eq!((ss.pi, ss.i, ss.m), (1.0, 1.25, 5.0));
        let ss = steady_state(&Regime::target_two()).unwrap();
        assert_eq!(ss.pi, 1.1);
        assert!(close(ss.i, 1.375, 1e-15));
        assert!((ss.m - 3.67).abs() <= 0.005);
        let ss = steady_state(&Regime::new(1.0, -0.5, 0.99).unwrap()).unwrap();
        assert!(close(ss.i, 1.0 / 0.99, 1e-15));
        assert!(close(ss.m, 100.0, 1e-10));
        let low = Regime::new(0.7, -0.5, 0.8).unwrap();
        assert!(matches!(
            steady_state(&low),
            Err(EconomyError::BeliefTooLow { .. })
        ));
    }

    #[test]
    fn regime_validation() {
        assert!(matches!(
            Regime::new(1.0, -1.0, 0.8),
            Err(EconomyError::DegenerateExponent { .. })
        ));
        assert!(Regime::new(1.0, -0.5, 1.0).is_err());
        assert!(Regime::new(0.0, -0.5, 0.8).is_err());
        assert!(Regime::target_one().is_passive());
        assert!(!Regime::new(1.0, 0.5, 0.8).unwrap().is_passive());
    }

    #[test]
    fn initial_state_stays_in_bounds() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let bounds = ActionBounds::default();
        for _ in 0..1000 {
            let s = initial_state(&Regime::target_one(), &bounds, 0.05, &mut rng).unwrap();
            assert!((s.pi_prev - 1.0).abs() <= 0.05);
            assert!((s.belief_prev - 1.0).abs() <= 0.05);
            assert_eq!(s.m_prev, 5.0);
        }
    }

    fn regimes() -> impl Strategy<Value = Regime> {
        (0.95f64..1.3, -0.9f64..-0.1, 0.5f64..0.9)
            .prop_map(|(p, l, b)| Regime::new(p, l, b).unwrap())
    }

    proptest! {
        #[test]
        fn fixed_point_after_one_step(
            regime in regimes(),
            pi_prev in 0.9f64..1.4,
            belief_prev in 0.9f64..1.4,
            m_prev in 1.0f64..10.0,
        ) {
            let ss = steady_state(&regime).unwrap();
            let out = step(&MacroState::new(pi_prev, belief_prev, m_prev), regime.pi_hat, &regime).unwrap();
            prop_assert!(close(out.pi, ss.pi, 1e-12));
            prop_assert!(close(out.i, ss.i, 1e-12));
            prop_assert!(close(out.m, ss.m, 1e-12));
        }

        #[test]
        fn reward_nonpositive_and_zero_only_on_exact(b in 0.5f64..2.0, p in 0.5f64..2.0) {
            let r = reward(b, p);
            prop_assert!(r <= 0.0);
            prop_assert_eq!(r == 0.0, b == p);
        }

        #[test]
        fn tau_balances_budget(a in 0.9f64..1.4, m_prev in 1.0f64..10.0) {
            let out = step(&MacroState::new(1.0, 1.0, m_prev), a, &Regime::target_two()).unwrap();
            prop_assert_eq!(out.tau, out.m - m_prev / out.pi);
            prop_assert!(out.i > 1.0 && out.m > 0.0 && out.pi > 0.0 && out.reward <= 0.0);
        }
    }

    #[test]
    fn inflation_increasing_in_action() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let bounds = ActionBounds::default();
        for regime in [Regime::target_one(), Regime::target_two()] {
            for _ in 0..1000 {
                let a = rng.gen_range(bounds.lo..bounds.hi);
                let b = rng.gen_range(bounds.lo..bounds.hi);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                if lo == hi {
                    continue;
                }
                let s = MacroState::new(1.0, 1.0, 5.0);
                let p_lo = step(&s, lo, &regime).unwrap().pi;
                let p_hi = step(&s, hi, &regime).unwrap().pi;
                assert!(p_lo < p_hi);
            }
        }
    }
}
