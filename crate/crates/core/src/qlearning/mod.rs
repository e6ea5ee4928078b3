//! Tabular Q-learning over the 30-state quiz MDP, plus an exact solver
//! used to check the learned policy.

mod oracle;
mod policy;
mod table;
mod train;

pub use oracle::{value_iteration, ExactMdp, ValueIterationResult, MAX_SWEEPS};
pub use policy::{
    greedy_policy, policy_agreement, ConstantPolicy, EpsilonGreedy, Policy, TablePolicy,
};
pub use table::{QTable, QTableMeta, QTABLE_HEADER};
pub use train::{
    epsilon_at, q_update, read_metrics_csv, select_action, train, write_metrics_csv,
    ConvergenceSummary, EpochMetrics, Trainer, TrainingConfig, TrainingRun,
};
