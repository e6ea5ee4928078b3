//! Stochastic simulated users.
//!
//! A user model only looks at the current engagement class and the robot's
//! action. The next engagement comes from a 3×3 table per action; within
//! the chosen class the (gaze, smile) pair is uniform, and the answer is
//! correct with the class's `p_correct`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{fmt_sum, Error, Result};
use crate::mdp::{
    encode_state, engagement_class, AnswerOutcome, EngagementLevel, RobotAction, UserObservation,
    NUM_STATES,
};
use crate::rng::RngStream;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

const SUM_TOLERANCE: f64 = 1e-9;

pub const HEALTHY_MODEL_TOML: &str = include_str!("../fixtures/healthy.model");
pub const MCI_MODEL_TOML: &str = include_str!("../fixtures/mci.model");

/// `table[action][current][next]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EngagementTransitionTable(pub [[[f64; 3]; 3]; 3]);

impl EngagementTransitionTable {
    pub fn row(&self, action: RobotAction, current: EngagementLevel) -> &[f64; 3] {
        &self.0[action.code()][current.code()]
    }

    fn validate(&self) -> Result<()> {
        for action in RobotAction::ALL {
            for level in EngagementLevel::ALL {
                let row = self.row(action, level);
                let field = format!("transitions.{action}[{level}]");
                if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(Error::validation(
                        field,
                        format!("probability {p} is outside [0, 1]"),
                    ));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > SUM_TOLERANCE {
                    return Err(Error::validation(
                        field,
                        format!("row sums to {}", fmt_sum(sum)),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerModel {
    /// Indexed by engagement code.
    pub p_correct: [f64; 3],
}

impl AnswerModel {
    pub fn p_correct(&self, level: EngagementLevel) -> f64 {
        self.p_correct[level.code()]
    }

    fn validate(&self) -> Result<()> {
        if let Some(p) = self.p_correct.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::validation(
                "p_correct",
                format!("probability {p} is outside [0, 1]"),
            ));
        }
        let [low, medium, high] = self.p_correct;
        if !(low <= medium && medium <= high) {
            return Err(Error::validation(
                "p_correct",
                format!("must be non-decreasing in engagement, got [{low}, {medium}, {high}]"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserModel {
    pub name: String,
    pub transitions: EngagementTransitionTable,
    pub answers: AnswerModel,
    pub initial_engagement_dist: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    schema_version: u32,
    name: String,
    initial_engagement: [f64; 3],
    p_correct: [f64; 3],
    transitions: TransitionsDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionsDoc {
    enthusiastic: [[f64; 3]; 3],
    neutral: [[f64; 3]; 3],
    stimulating: [[f64; 3]; 3],
}

/// Parses and validates a user-model document. `source_name` only labels
/// error messages.
pub fn load_user_model(text: &str, source_name: &str) -> Result<UserModel> {
    let doc: ModelDoc = toml::from_str(text).map_err(|e| Error::parse(source_name, e))?;
    if doc.schema_version != MODEL_SCHEMA_VERSION {
        return Err(Error::validation(
            "schema_version",
            format!(
                "unsupported version {} (expected {MODEL_SCHEMA_VERSION})",
                doc.schema_version
            ),
        ));
    }
    let model = UserModel {
        name: doc.name,
        transitions: EngagementTransitionTable([
            doc.transitions.enthusiastic,
            doc.transitions.neutral,
            doc.transitions.stimulating,
        ]),
        answers: AnswerModel {
            p_correct: doc.p_correct,
        },
        initial_engagement_dist: doc.initial_engagement,
    };
    model.validate()?;
    Ok(model)
}

impl UserModel {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        load_user_model(&text, &path.display().to_string())
    }

    /// The shipped healthy-user model.
    pub fn healthy() -> Self {
        load_user_model(HEALTHY_MODEL_TOML, "healthy.model").expect("shipped fixture is valid")
    }

    /// The shipped MCI-user model.
    pub fn mci() -> Self {
        load_user_model(MCI_MODEL_TOML, "mci.model").expect("shipped fixture is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        self.transitions.validate()?;
        self.answers.validate()?;
        let init = &self.initial_engagement_dist;
        if let Some(p) = init.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::validation(
                "initial_engagement",
                format!("probability {p} is outside [0, 1]"),
            ));
        }
        let sum: f64 = init.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::validation(
                "initial_engagement",
                format!("row sums to {}", fmt_sum(sum)),
            ));
        }
        Ok(())
    }
}

/// Full next-state distribution, indexed by state index.
pub fn transition_distribution(
    model: &UserModel,
    current: UserObservation,
    action: RobotAction,
) -> [f64; NUM_STATES] {
    let mut dist = [0.0; NUM_STATES];
    let row = model.transitions.row(action, current.engagement());
    for next in EngagementLevel::ALL {
        let p_level = row[next.code()];
        if p_level == 0.0 {
            continue;
        }
        let pairs = engagement_class(next);
        let p_pair = p_level / pairs.len() as f64;
        let p_correct = model.answers.p_correct(next);
        for (gaze, smile) in pairs {
            for (answer, p_answer) in [
                (AnswerOutcome::Wrong, 1.0 - p_correct),
                (AnswerOutcome::Correct, p_correct),
            ] {
                dist[encode_state(UserObservation::new(gaze, smile, answer))] += p_pair * p_answer;
            }
        }
    }
    dist
}

/// Samples the user's response to `action`. Always consumes three draws:
/// next engagement, the (gaze, smile) pair within that class, then the
/// answer.
pub fn step_user(
    model: &UserModel,
    current: UserObservation,
    action: RobotAction,
    rng: &mut RngStream,
) -> UserObservation {
    let row = model.transitions.row(action, current.engagement());
    let next = EngagementLevel::ALL[rng.next_categorical(row)];
    let pairs = engagement_class(next);
    let (gaze, smile) = pairs[rng.next_index(pairs.len())];
    let answer = if rng.next_f64() < model.answers.p_correct(next) {
        AnswerOutcome::Correct
    } else {
        AnswerOutcome::Wrong
    };
    UserObservation::new(gaze, smile, answer)
}

/// Start-of-episode observation. Consumes two draws (engagement, then the
/// pair within the class). No question has been answered yet, so the
/// answer field starts as `Correct`.
pub fn sample_initial_state(model: &UserModel, rng: &mut RngStream) -> UserObservation {
    let level = EngagementLevel::ALL[rng.next_categorical(&model.initial_engagement_dist)];
    let pairs = engagement_class(level);
    let (gaze, smile) = pairs[rng.next_index(pairs.len())];
    UserObservation::new(gaze, smile, AnswerOutcome::Correct)
}
