//! Exact solver for the simulated MDP.
//!
//! The user model is fully known, so the optimal action values can be
//! computed by value iteration and used to check what Q-learning found.

use crate::error::{Error, Result};
use crate::mdp::{compute_reward, RewardParams, RobotAction, UserObservation, NUM_ACTIONS, NUM_STATES};
use crate::user_sim::{transition_distribution, UserModel};

use super::{QTable, QTableMeta};

/// Upper bound on sweeps; a contraction with gamma < 1 stops long before.
pub const MAX_SWEEPS: usize = 100_000;

/// Dense transition and reward arrays for one (model, reward) pair.
#[derive(Debug, Clone)]
pub struct ExactMdp {
    /// `transitions[s][a][s']`.
    pub transitions: Vec<[[f64; NUM_STATES]; NUM_ACTIONS]>,
    /// Reward for arriving in `s'`.
    pub rewards: [f64; NUM_STATES],
}

impl ExactMdp {
    pub fn new(model: &UserModel, reward: &RewardParams) -> Self {
        let transitions = UserObservation::all()
            .map(|obs| RobotAction::ALL.map(|a| transition_distribution(model, obs, a)))
            .collect();
        let mut rewards = [0.0; NUM_STATES];
        for (i, obs) in UserObservation::all().enumerate() {
            rewards[i] = compute_reward(obs, reward);
        }
        Self {
            transitions,
            rewards,
        }
    }

    /// Expected one-step reward of taking `action` in `state`.
    pub fn expected_reward(&self, state: usize, action: RobotAction) -> f64 {
        self.transitions[state][action.code()]
            .iter()
            .zip(&self.rewards)
            .map(|(p, r)| p * r)
            .sum()
    }

    /// One Bellman optimality backup of `q`.
    pub fn backup(&self, q: &QTable, gamma: f64) -> QTable {
        let v: Vec<f64> = (0..NUM_STATES).map(|s| q.max_value(s)).collect();
        let mut next = QTable::zeros();
        for s in 0..NUM_STATES {
            for a in RobotAction::ALL {
                let value = self.transitions[s][a.code()]
                    .iter()
                    .enumerate()
                    .map(|(s2, p)| p * (self.rewards[s2] + gamma * v[s2]))
                    .sum();
                next.set(s, a, value);
            }
        }
        next
    }
}

#[derive(Debug, Clone)]
pub struct ValueIterationResult {
    pub qtable: QTable,
    /// Number of backups applied.
    pub sweeps: usize,
    /// Max-entry change of the final backup.
    pub residual: f64,
}

/// Runs Bellman backups from Q = 0 until the largest entry change drops
/// below `tolerance`.
pub fn value_iteration(
    model: &UserModel,
    reward: &RewardParams,
    gamma: f64,
    tolerance: f64,
) -> Result<ValueIterationResult> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::validation("gamma", format!("must be in [0, 1), got {gamma}")));
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::validation(
            "tolerance",
            format!("must be positive, got {tolerance}"),
        ));
    }
    model.validate()?;
    reward.validate()?;

    let mdp = ExactMdp::new(model, reward);
    let mut q = QTable::zeros();
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    while residual >= tolerance && sweeps < MAX_SWEEPS {
        let next = mdp.backup(&q, gamma);
        residual = next
            .values()
            .iter()
            .flatten()
            .zip(q.values().iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        q = next;
        sweeps += 1;
    }
    q.meta = QTableMeta {
        model_name: Some(model.name.clone()),
        reward: Some(*reward),
        ..Default::default()
    };
    Ok(ValueIterationResult {
        qtable: q,
        sweeps,
        residual,
    })
}
