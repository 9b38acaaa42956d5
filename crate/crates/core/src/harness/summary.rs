use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::criteria::{self, mean, CriterionResult};
use super::{HarnessError, Result, TrajectoryRecord};
use crate::economy::{self, Regime};

/// One simulated trajectory with the arm that produced it: `train`,
/// `explore`, `frozen`, or `ep<N>` for an experience level.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmTrajectory {
    pub arm: String,
    pub seed: u64,
    pub records: Vec<TrajectoryRecord>,
}

impl ArmTrajectory {
    pub fn new(arm: impl Into<String>, seed: u64, records: Vec<TrajectoryRecord>) -> Self {
        Self {
            arm: arm.into(),
            seed,
            records,
        }
    }

    /// File name the CLI writes this trajectory to.
    pub fn file_name(&self) -> String {
        format!("{}_seed{}.csv", self.arm, self.seed)
    }

    pub fn experience_level(&self) -> Option<usize> {
        self.arm.strip_prefix("ep").and_then(|l| l.parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub arm: String,
    pub seed: u64,
    pub periods: usize,
    pub window: usize,
    pub belief_mean: f64,
    pub pi_mean: f64,
    pub i_mean: f64,
    pub m_mean: f64,
    /// Root mean squared forecast error over the whole trajectory.
    pub forecast_rmse: f64,
    /// Steady state of the regime in force at the end of the trajectory.
    pub steady_pi: f64,
    pub steady_i: f64,
    pub steady_m: f64,
    pub dist_belief: f64,
    pub dist_pi: f64,
    pub dist_i: f64,
    pub dist_m: f64,
    /// Periods after the target change until the belief first exceeds the
    /// midpoint of the two targets; `None` without a switch or if it never
    /// does.
    pub switch_delay: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub criteria: Vec<CriterionResult>,
}

impl Summary {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn row(&self, arm: &str, seed: u64) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.arm == arm && r.seed == seed)
    }

    /// Largest absolute difference between numeric fields of matching rows,
    /// or `None` if the row sets differ.
    pub fn max_abs_difference(&self, other: &Summary) -> Option<f64> {
        if self.rows.len() != other.rows.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for a in &self.rows {
            let b = other.row(&a.arm, a.seed)?;
            if a.periods != b.periods || a.window != b.window || a.switch_delay != b.switch_delay {
                return None;
            }
            for (x, y) in a.numbers().iter().zip(b.numbers()) {
                worst = worst.max((x - y).abs());
            }
        }
        Some(worst)
    }
}

impl SummaryRow {
    fn numbers(&self) -> [f64; 12] {
        [
            self.belief_mean,
            self.pi_mean,
            self.i_mean,
            self.m_mean,
            self.forecast_rmse,
            self.steady_pi,
            self.steady_i,
            self.steady_m,
            self.dist_belief,
            self.dist_pi,
            self.dist_i,
            self.dist_m,
        ]
    }
}

fn summarize_one(t: &ArmTrajectory, regimes: &[Regime; 2], window: usize) -> Result<SummaryRow> {
    let recs = &t.records;
    let last = recs.last().ok_or(HarnessError::EmptyInput)?;
    let regime = regimes
        .get(last.regime_id)
        .ok_or_else(|| HarnessError::BadConfig(format!("unknown regime id {}", last.regime_id)))?;
    let ss = economy::steady_state(regime)?;
    let tail = &recs[recs.len().saturating_sub(window)..];
    let belief_mean = mean(tail.iter().map(|r| r.belief));
    let pi_mean = mean(tail.iter().map(|r| r.pi));
    let i_mean = mean(tail.iter().map(|r| r.i));
    let m_mean = mean(tail.iter().map(|r| r.m));
    let forecast_rmse = mean(recs.iter().map(|r| r.reward * r.reward)).sqrt();
    let threshold = 0.5 * (regimes[0].pi_hat + regimes[1].pi_hat);
    let switch_delay = recs.iter().position(|r| r.regime_id == 1).and_then(|k| {
        recs[k..]
            .iter()
            .position(|r| if regimes[1].pi_hat >= regimes[0].pi_hat {
                r.belief > threshold
            } else {
                r.belief < threshold
            })
    });
    Ok(SummaryRow {
        arm: t.arm.clone(),
        seed: t.seed,
        periods: recs.len(),
        window: tail.len(),
        belief_mean,
        pi_mean,
        i_mean,
        m_mean,
        forecast_rmse,
        steady_pi: ss.pi,
        steady_i: ss.i,
        steady_m: ss.m,
        dist_belief: (belief_mean - ss.pi).abs(),
        dist_pi: (pi_mean - ss.pi).abs(),
        dist_i: (i_mean - ss.i).abs(),
        dist_m: (m_mean - ss.m).abs(),
        switch_delay,
    })
}

/// Per-arm, per-seed terminal metrics plus every criterion the supplied
/// arms make checkable: `train` (learning), `explore` (adaptation),
/// `frozen` (control) and `ep<N>` (experience ordering). Trajectories must
/// be nonempty.
pub fn summarize(
    trajectories: &[ArmTrajectory],
    regimes: &[Regime; 2],
    window: usize,
) -> Result<Summary> {
    if trajectories.is_empty() || trajectories.iter().any(|t| t.records.is_empty()) {
        return Err(HarnessError::EmptyInput);
    }
    let rows = trajectories
        .iter()
        .map(|t| summarize_one(t, regimes, window))
        .collect::<Result<Vec<_>>>()?;

    let by_arm = |arm: &str| -> Vec<(u64, &[TrajectoryRecord])> {
        trajectories
            .iter()
            .filter(|t| t.arm == arm)
            .map(|t| (t.seed, t.records.as_slice()))
            .collect()
    };
    let mut criteria = Vec::new();
    let train = by_arm("train");
    if !train.is_empty() {
        criteria.push(criteria::learning_under_target(&train, regimes[0].pi_hat, window));
    }
    let explore = by_arm("explore");
    if !explore.is_empty() {
        criteria.push(criteria::regime_switch_adaptation(&explore, window));
    }
    let frozen = by_arm("frozen");
    if !frozen.is_empty() {
        criteria.push(criteria::no_exploration_control(&frozen, regimes, window));
    }
    let mut levels: BTreeMap<u64, Vec<(usize, f64)>> = BTreeMap::new();
    for t in trajectories {
        if let Some(level) = t.experience_level() {
            levels
                .entry(t.seed)
                .or_default()
                .push((level, criteria::terminal_belief(&t.records, window)));
        }
    }
    if !levels.is_empty() {
        let levels: Vec<_> = levels.into_iter().collect();
        criteria.push(criteria::experience_ordering(&levels, regimes[1].pi_hat));
    }
    Ok(Summary { rows, criteria })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steady_rows(regime_id: usize, regime: &Regime, n: usize) -> Vec<TrajectoryRecord> {
        let ss = economy::steady_state(regime).unwrap();
        (0..n)
            .map(|p| TrajectoryRecord {
                seed: 7,
                episode: 0,
                period: p,
                regime_id,
                belief: ss.pi,
                pi: ss.pi,
                i: ss.i,
                m: ss.m,
                reward: 0.0,
                sigma: 0.0,
                critic_loss: 0.0,
                actor_objective: 0.0,
            })
            .collect()
    }

    #[test]
    fn steady_trajectory_has_zero_distances() {
        let regimes = [Regime::target_one(), Regime::target_two()];
        let t = ArmTrajectory::new("train", 7, steady_rows(0, &regimes[0], 200));
        let s = summarize(&[t], &regimes, 100).unwrap();
        let r = &s.rows[0];
        assert_eq!((r.dist_belief, r.dist_pi, r.dist_i, r.dist_m), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.forecast_rmse, 0.0);
        assert_eq!(s.criteria.len(), 1);
        assert!(s.all_passed());
    }

    #[test]
    fn two_arms_two_rows() {
        let regimes = [Regime::target_one(), Regime::target_two()];
        let mut recs = steady_rows(0, &regimes[0], 50);
        recs.extend(steady_rows(1, &regimes[1], 400));
        let s = summarize(
            &[
                ArmTrajectory::new("explore", 7, recs.clone()),
                ArmTrajectory::new("frozen", 7, recs),
            ],
            &regimes,
            100,
        )
        .unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(s.row("explore", 7).is_some() && s.row("frozen", 7).is_some());
        assert_eq!(s.row("explore", 7).unwrap().switch_delay, Some(0));
        assert_eq!(s.max_abs_difference(&s), Some(0.0));
    }

    #[test]
    fn empty_input_rejected() {
        let regimes = [Regime::target_one(), Regime::target_two()];
        assert!(matches!(summarize(&[], &regimes, 10), Err(HarnessError::EmptyInput)));
        let t = ArmTrajectory::new("train", 1, Vec::new());
        assert!(matches!(summarize(&[t], &regimes, 10), Err(HarnessError::EmptyInput)));
    }

    #[test]
    fn experience_arm_names() {
        assert_eq!(ArmTrajectory::new("ep15", 1, vec![]).experience_level(), Some(15));
        assert_eq!(ArmTrajectory::new("explore", 1, vec![]).experience_level(), None);
        assert_eq!(ArmTrajectory::new("ep5", 3, vec![]).file_name(), "ep5_seed3.csv");
    }
}
