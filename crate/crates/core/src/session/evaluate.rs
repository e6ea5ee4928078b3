use serde::Serialize;

use crate::error::{Error, Result};
use crate::qlearning::Policy;
use crate::rng::RngStream;
use crate::user_sim::UserModel;

use super::{run_episode, SessionContext, SessionLog, SimulatedUser};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSummary {
    pub policy: String,
    pub user: String,
    pub episodes: u64,
    pub seed: u64,
    pub mean_return: f64,
    /// Normal-approximation 95% half-width; `None` for a single episode.
    pub ci95_halfwidth: Option<f64>,
    /// Share of rounds ending at low / medium / high engagement.
    pub engagement_time_fractions: [f64; 3],
    pub correct_rate: f64,
}

impl EvaluationSummary {
    pub fn engaged_fraction(&self) -> f64 {
        self.engagement_time_fractions[1] + self.engagement_time_fractions[2]
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub summary: EvaluationSummary,
    pub logs: Vec<SessionLog>,
}

/// Runs `episodes` simulated sessions. Episode `i` uses
/// `RngStream::for_episode(seed, i)`, so two policies evaluated with the
/// same seed face the same initial draws.
pub fn evaluate_policy(
    policy: &dyn Policy,
    model: &UserModel,
    ctx: &SessionContext<'_>,
    episodes: u64,
    seed: u64,
) -> Result<Evaluation> {
    if episodes == 0 {
        return Err(Error::validation("episodes", "must be at least 1"));
    }
    let logs = (0..episodes)
        .map(|i| {
            let mut rng = RngStream::for_episode(seed, i);
            run_episode(policy, &mut SimulatedUser { model }, ctx, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = episodes as f64;
    let returns: Vec<f64> = logs.iter().map(|l| l.totals.cumulative_reward).collect();
    let mean_return = returns.iter().sum::<f64>() / n;
    let ci95_halfwidth = (episodes > 1).then(|| {
        let var = returns.iter().map(|r| (r - mean_return).powi(2)).sum::<f64>() / (n - 1.0);
        1.96 * (var / n).sqrt()
    });

    let mut histogram = [0usize; 3];
    let mut rounds = 0usize;
    let mut correct = 0usize;
    for log in &logs {
        for (h, c) in histogram.iter_mut().zip(log.totals.engagement_histogram) {
            *h += c;
        }
        rounds += log.rounds.len();
        correct += log.totals.correct_count;
    }
    let rounds_f = rounds.max(1) as f64;

    Ok(Evaluation {
        summary: EvaluationSummary {
            policy: policy.label(),
            user: model.name.clone(),
            episodes,
            seed,
            mean_return,
            ci95_halfwidth,
            engagement_time_fractions: histogram.map(|h| h as f64 / rounds_f),
            correct_rate: correct as f64 / rounds_f,
        },
        logs,
    })
}
