use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{compute_reward, encode_state, RewardParams, RobotAction, NUM_ACTIONS};
use crate::rng::RngStream;
use crate::user_sim::{sample_initial_state, step_user, UserModel};

use super::{QTable, QTableMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Learning rate, in (0, 1].
    pub alpha: f64,
    /// Discount factor, in [0, 1).
    pub gamma: f64,
    pub epsilon0: f64,
    /// Per-epoch exponential decay rate of epsilon.
    pub epsilon_decay: f64,
    pub epsilon_floor: f64,
    pub epochs: u64,
    pub episodes_per_epoch: u64,
    /// One step per quiz question.
    pub steps_per_episode: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            gamma: 0.05,
            epsilon0: 0.2,
            epsilon_decay: 0.05,
            epsilon_floor: 0.01,
            epochs: 100,
            episodes_per_epoch: 35,
            steps_per_episode: 8,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::validation(format!("training.{field}"), msg))
            }
        };
        check(
            self.alpha > 0.0 && self.alpha <= 1.0,
            "alpha",
            format!("must be in (0, 1], got {}", self.alpha),
        )?;
        check(
            (0.0..1.0).contains(&self.gamma),
            "gamma",
            format!("must be in [0, 1), got {}", self.gamma),
        )?;
        check(
            (0.0..=1.0).contains(&self.epsilon0),
            "epsilon0",
            format!("must be in [0, 1], got {}", self.epsilon0),
        )?;
        check(
            self.epsilon_decay >= 0.0 && self.epsilon_decay.is_finite(),
            "epsilon_decay",
            format!("must be a finite non-negative rate, got {}", self.epsilon_decay),
        )?;
        check(
            (0.0..=1.0).contains(&self.epsilon_floor),
            "epsilon_floor",
            format!("must be in [0, 1], got {}", self.epsilon_floor),
        )?;
        check(
            self.epsilon_floor <= self.epsilon0,
            "epsilon_floor",
            format!(
                "must not exceed epsilon0 ({} > {})",
                self.epsilon_floor, self.epsilon0
            ),
        )
    }
}

/// Per-epoch training statistics, one CSV row each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: u64,
    pub epsilon: f64,
    /// Sum of |ΔQ| over every update in the epoch.
    pub update_sum: f64,
    /// Mean of all 90 entries at the end of the epoch.
    pub qtable_mean: f64,
    pub mean_episode_return: f64,
}

pub fn write_metrics_csv<W: Write>(metrics: &[EpochMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if metrics.is_empty() {
        w.write_record(["epoch", "epsilon", "update_sum", "qtable_mean", "mean_episode_return"])
            .map_err(|e| Error::Io(e.into()))?;
    }
    for m in metrics {
        w.serialize(m).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv<R: std::io::Read>(input: R) -> Result<Vec<EpochMetrics>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| {
            r.map_err(|e: csv::Error| Error::Csv {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}

/// One Q-learning backup. Returns |ΔQ(s, a)|.
pub fn q_update(
    q: &mut QTable,
    state: usize,
    action: RobotAction,
    reward: f64,
    next_state: usize,
    alpha: f64,
    gamma: f64,
) -> f64 {
    let old = q.get(state, action);
    let target = reward + gamma * q.max_value(next_state);
    let new = old + alpha * (target - old);
    q.set(state, action, new);
    (new - old).abs()
}

/// `max(floor, epsilon0 · exp(-decay · epoch))`.
pub fn epsilon_at(epoch: u64, cfg: &TrainingConfig) -> f64 {
    (cfg.epsilon0 * (-cfg.epsilon_decay * epoch as f64).exp()).max(cfg.epsilon_floor)
}

/// Epsilon-greedy choice. One draw decides whether to explore; exploring
/// takes a second draw for the uniform action.
pub fn select_action(q: &QTable, state: usize, epsilon: f64, rng: &mut RngStream) -> RobotAction {
    if rng.next_f64() < epsilon {
        RobotAction::ALL[rng.next_index(NUM_ACTIONS)]
    } else {
        q.greedy_action(state)
    }
}

/// Output of a finished training run.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub qtable: QTable,
    pub metrics: Vec<EpochMetrics>,
}

/// Owns the Q-table and random stream for one run.
pub struct Trainer<'a> {
    model: &'a UserModel,
    reward: RewardParams,
    cfg: TrainingConfig,
    rng: RngStream,
    q: QTable,
    metrics: Vec<EpochMetrics>,
}

impl<'a> Trainer<'a> {
    pub fn new(
        model: &'a UserModel,
        reward: &RewardParams,
        cfg: &TrainingConfig,
        seed: u64,
    ) -> Result<Self> {
        model.validate()?;
        reward.validate()?;
        cfg.validate()?;
        let mut q = QTable::zeros();
        q.meta = QTableMeta {
            model_name: Some(model.name.clone()),
            seed: Some(seed),
            epochs_trained: 0,
            training: Some(*cfg),
            reward: Some(*reward),
        };
        Ok(Self {
            model,
            reward: *reward,
            cfg: *cfg,
            rng: RngStream::new(seed),
            q,
            metrics: Vec::with_capacity(cfg.epochs as usize),
        })
    }

    pub fn qtable(&self) -> &QTable {
        &self.q
    }

    pub fn run_epoch(&mut self) -> EpochMetrics {
        let epoch = self.q.meta.epochs_trained;
        let epsilon = epsilon_at(epoch, &self.cfg);
        let mut update_sum = 0.0;
        let mut total_return = 0.0;

        for _ in 0..self.cfg.episodes_per_epoch {
            let mut obs = sample_initial_state(self.model, &mut self.rng);
            for _ in 0..self.cfg.steps_per_episode {
                let s = encode_state(obs);
                let action = select_action(&self.q, s, epsilon, &mut self.rng);
                let next = step_user(self.model, obs, action, &mut self.rng);
                let r = compute_reward(next, &self.reward);
                update_sum += q_update(
                    &mut self.q,
                    s,
                    action,
                    r,
                    encode_state(next),
                    self.cfg.alpha,
                    self.cfg.gamma,
                );
                total_return += r;
                obs = next;
            }
        }
        debug_assert!(self.q.is_finite());

        let episodes = self.cfg.episodes_per_epoch.max(1) as f64;
        let m = EpochMetrics {
            epoch,
            epsilon,
            update_sum,
            qtable_mean: self.q.mean(),
            mean_episode_return: total_return / episodes,
        };
        self.q.meta.epochs_trained += 1;
        self.metrics.push(m);
        m
    }

    pub fn finish(self) -> TrainingRun {
        TrainingRun {
            qtable: self.q,
            metrics: self.metrics,
        }
    }
}

/// Trains from an all-zero table for `cfg.epochs` epochs. Deterministic in
/// `(model, reward, cfg, seed)`.
pub fn train(
    model: &UserModel,
    reward: &RewardParams,
    cfg: &TrainingConfig,
    seed: u64,
) -> Result<TrainingRun> {
    let mut trainer = Trainer::new(model, reward, cfg, seed)?;
    for _ in 0..cfg.epochs {
        trainer.run_epoch();
    }
    Ok(trainer.finish())
}

/// Final-window convergence statistics over a metrics series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSummary {
    pub peak_update_sum: f64,
    pub tail_mean_update_sum: f64,
    /// `tail_mean_update_sum / peak_update_sum`.
    pub update_ratio: f64,
    /// Largest |Δ qtable_mean| between consecutive epochs in the window.
    pub max_mean_drift: f64,
    pub window: usize,
}

impl ConvergenceSummary {
    /// `None` when there are fewer than `window + 1` epochs.
    pub fn from_metrics(metrics: &[EpochMetrics], window: usize) -> Option<Self> {
        if window == 0 || metrics.len() <= window {
            return None;
        }
        let peak = metrics.iter().map(|m| m.update_sum).fold(0.0, f64::max);
        let tail = &metrics[metrics.len() - window..];
        let tail_mean = tail.iter().map(|m| m.update_sum).sum::<f64>() / window as f64;
        let max_mean_drift = metrics[metrics.len() - window - 1..]
            .windows(2)
            .map(|w| (w[1].qtable_mean - w[0].qtable_mean).abs())
            .fold(0.0, f64::max);
        Some(Self {
            peak_update_sum: peak,
            tail_mean_update_sum: tail_mean,
            update_ratio: if peak > 0.0 { tail_mean / peak } else { 0.0 },
            max_mean_drift,
            window,
        })
    }

    pub fn converged(&self, max_ratio: f64, max_drift: f64) -> bool {
        self.update_ratio <= max_ratio && self.max_mean_drift < max_drift
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_from_zero() {
        let mut q = QTable::zeros();
        let d = q_update(&mut q, 0, RobotAction::Enthusiastic, 1.0, 1, 0.8, 0.05);
        assert!((q.get(0, RobotAction::Enthusiastic) - 0.8).abs() < 1e-12);
        assert!((d - 0.8).abs() < 1e-12);
    }

    #[test]
    fn update_with_bootstrap() {
        let mut q = QTable::zeros();
        q.set(0, RobotAction::Neutral, 0.5);
        q.set(1, RobotAction::Stimulating, 0.2);
        let d = q_update(&mut q, 0, RobotAction::Neutral, 1.0, 1, 0.8, 0.05);
        assert!((q.get(0, RobotAction::Neutral) - 0.908).abs() < 1e-12);
        assert!((d - 0.408).abs() < 1e-12);
    }

    #[test]
    fn update_at_fixed_point_is_zero() {
        let mut q = QTable::zeros();
        q.set(4, RobotAction::Neutral, 0.7);
        let d = q_update(&mut q, 4, RobotAction::Neutral, 0.7, 9, 0.8, 0.05);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = TrainingConfig::default();
        assert_eq!(epsilon_at(0, &cfg), 0.2);
        assert_eq!(epsilon_at(100, &cfg), 0.01);
        assert_eq!(epsilon_at(u64::MAX, &cfg), 0.01);
        let mut prev = f64::INFINITY;
        for e in 0..500 {
            let eps = epsilon_at(e, &cfg);
            assert!(eps <= prev && eps >= cfg.epsilon_floor);
            prev = eps;
        }
    }

    #[test]
    fn greedy_selection() {
        let mut q = QTable::zeros();
        q.set(2, RobotAction::Enthusiastic, 0.1);
        q.set(2, RobotAction::Neutral, 0.9);
        q.set(2, RobotAction::Stimulating, 0.3);
        let mut rng = RngStream::new(0);
        assert_eq!(select_action(&q, 2, 0.0, &mut rng), RobotAction::Neutral);

        q.set(3, RobotAction::Enthusiastic, 0.5);
        q.set(3, RobotAction::Neutral, 0.5);
        q.set(3, RobotAction::Stimulating, 0.1);
        assert_eq!(select_action(&q, 3, 0.0, &mut rng), RobotAction::Enthusiastic);
    }

    #[test]
    fn config_validation() {
        assert!(TrainingConfig::default().validate().is_ok());
        for bad in [
            TrainingConfig { alpha: 0.0, ..Default::default() },
            TrainingConfig { gamma: 1.0, ..Default::default() },
            TrainingConfig { epsilon0: 1.5, ..Default::default() },
            TrainingConfig { epsilon_floor: 0.3, ..Default::default() },
            TrainingConfig { epsilon_decay: -1.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn zero_epochs_is_zero_table() {
        let cfg = TrainingConfig { epochs: 0, ..Default::default() };
        let run = train(&UserModel::healthy(), &RewardParams::default(), &cfg, 42).unwrap();
        assert!(run.metrics.is_empty());
        assert_eq!(run.qtable.values(), QTable::zeros().values());
    }

    #[test]
    fn metrics_csv_header_and_roundtrip() {
        let cfg = TrainingConfig { epochs: 3, ..Default::default() };
        let run = train(&UserModel::mci(), &RewardParams::default(), &cfg, 1).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&run.metrics, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("epoch,epsilon,update_sum,qtable_mean,mean_episode_return\n"));
        assert_eq!(read_metrics_csv(text.as_bytes()).unwrap(), run.metrics);

        let mut empty = Vec::new();
        write_metrics_csv(&[], &mut empty).unwrap();
        assert_eq!(
            String::from_utf8(empty).unwrap(),
            "epoch,epsilon,update_sum,qtable_mean,mean_episode_return\n"
        );
    }

    #[test]
    fn metrics_are_ordered_and_nonnegative() {
        let cfg = TrainingConfig { epochs: 20, ..Default::default() };
        let run = train(&UserModel::healthy(), &RewardParams::default(), &cfg, 9).unwrap();
        for (i, m) in run.metrics.iter().enumerate() {
            assert_eq!(m.epoch, i as u64);
            assert!(m.update_sum >= 0.0);
        }
        assert_eq!(run.qtable.meta.epochs_trained, 20);
    }

    #[test]
    fn convergence_summary_window() {
        let m = |epoch, update_sum, qtable_mean| EpochMetrics {
            epoch,
            epsilon: 0.1,
            update_sum,
            qtable_mean,
            mean_episode_return: 0.0,
        };
        let series = vec![m(0, 10.0, 0.0), m(1, 4.0, 0.5), m(2, 1.0, 0.51), m(3, 0.5, 0.515)];
        let s = ConvergenceSummary::from_metrics(&series, 2).unwrap();
        assert_eq!(s.peak_update_sum, 10.0);
        assert!((s.update_ratio - 0.075).abs() < 1e-12);
        assert!((s.max_mean_drift - 0.01).abs() < 1e-12);
        assert!(ConvergenceSummary::from_metrics(&series, 4).is_none());
    }
}
