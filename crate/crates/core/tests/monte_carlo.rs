//! Sampling checks against the analytic distributions.

use sar_adapt::mdp::{decode_state, encode_state, EngagementLevel, RobotAction, UserObservation};
use sar_adapt::qlearning::{select_action, QTable};
use sar_adapt::rng::RngStream;
use sar_adapt::user_sim::{step_user, transition_distribution, UserModel};

const SAMPLES: usize = 100_000;

#[test]
fn stimulating_frequencies_match_mci_rows() {
    let model = UserModel::mci();
    let mut rng = RngStream::new(42);
    for state in [decode_state(0).unwrap(), decode_state(13).unwrap(), decode_state(29).unwrap()] {
        let mut counts = [0usize; 3];
        for _ in 0..SAMPLES {
            let next = step_user(&model, state, RobotAction::Stimulating, &mut rng);
            counts[next.engagement().code()] += 1;
        }
        let row = model.transitions.row(RobotAction::Stimulating, state.engagement());
        for level in EngagementLevel::ALL {
            let freq = counts[level.code()] as f64 / SAMPLES as f64;
            assert!((freq - row[level.code()]).abs() <= 0.01, "{state} {level}: {freq}");
        }
    }
}

#[test]
fn full_state_frequencies_match_distribution() {
    let model = UserModel::healthy();
    let state = UserObservation::all().nth(20).unwrap();
    let dist = transition_distribution(&model, state, RobotAction::Enthusiastic);
    let mut counts = [0usize; 30];
    let mut rng = RngStream::new(7);
    for _ in 0..SAMPLES {
        counts[encode_state(step_user(&model, state, RobotAction::Enthusiastic, &mut rng))] += 1;
    }
    // Pearson chi-squared over cells with positive mass; 99.9% quantile for
    // up to 29 degrees of freedom is below 59.
    let chi2: f64 = dist
        .iter()
        .zip(counts)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, c)| {
            let e = p * SAMPLES as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    assert!(chi2 < 59.0, "chi2 = {chi2}");
    assert!(dist.iter().zip(counts).all(|(p, c)| *p > 0.0 || c == 0));
}

#[test]
fn full_exploration_is_uniform() {
    let q = QTable::zeros();
    let mut rng = RngStream::new(42);
    let mut counts = [0usize; 3];
    for _ in 0..SAMPLES {
        counts[select_action(&q, 5, 1.0, &mut rng).code()] += 1;
    }
    for c in counts {
        assert!((c as f64 / SAMPLES as f64 - 1.0 / 3.0).abs() <= 0.01, "{counts:?}");
    }
}
