use crate::mdp::{RobotAction, NUM_STATES};
use crate::rng::RngStream;

use super::{select_action, QTable};

/// Per-state argmax of `q`, ties going to the lowest action code.
pub fn greedy_policy(q: &QTable) -> [RobotAction; NUM_STATES] {
    std::array::from_fn(|s| q.greedy_action(s))
}

/// Fraction of states on which two policies pick the same action.
pub fn policy_agreement(a: &[RobotAction; NUM_STATES], b: &[RobotAction; NUM_STATES]) -> f64 {
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / NUM_STATES as f64
}

/// Anything that can pick an action for a state index.
pub trait Policy {
    fn choose(&self, state: usize, rng: &mut RngStream) -> RobotAction;

    fn label(&self) -> String;
}

/// Fixed lookup table, e.g. the greedy policy of a trained Q-table.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePolicy(pub [RobotAction; NUM_STATES]);

impl TablePolicy {
    pub fn greedy(q: &QTable) -> Self {
        Self(greedy_policy(q))
    }
}

impl Policy for TablePolicy {
    fn choose(&self, state: usize, _rng: &mut RngStream) -> RobotAction {
        self.0[state]
    }

    fn label(&self) -> String {
        "greedy".into()
    }
}

/// Always the same action; used as a comparison baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPolicy(pub RobotAction);

impl Policy for ConstantPolicy {
    fn choose(&self, _state: usize, _rng: &mut RngStream) -> RobotAction {
        self.0
    }

    fn label(&self) -> String {
        format!("constant-{}", self.0.short_id())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EpsilonGreedy<'a> {
    pub q: &'a QTable,
    pub epsilon: f64,
}

impl Policy for EpsilonGreedy<'_> {
    fn choose(&self, state: usize, rng: &mut RngStream) -> RobotAction {
        select_action(self.q, state, self.epsilon, rng)
    }

    fn label(&self) -> String {
        format!("epsilon-greedy({})", self.epsilon)
    }
}
