//! States, actions, engagement and reward for the quiz MDP.
//!
//! Every enumeration carries a fixed integer code. The codes define the
//! Q-table row layout and are what gets written to disk, so they must never
//! be renumbered.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of distinct user observations (5 gaze × 3 smile × 2 answer).
pub const NUM_STATES: usize = 30;
/// Number of robot adaptation actions.
pub const NUM_ACTIONS: usize = 3;

macro_rules! coded_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident = $code:expr, $label:expr;)+ }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant,)+
        }

        impl $name {
            pub const ALL: [$name; [$($code),+].len()] = [$($name::$variant),+];

            pub const fn code(self) -> usize {
                match self {
                    $($name::$variant => $code,)+
                }
            }

            pub fn from_code(code: usize) -> Option<Self> {
                Self::ALL.get(code).copied()
            }

            pub const fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label,)+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

coded_enum!(
    /// Where the user is looking.
    GazeDirection {
        Robot = 0, "robot";
        Tablet = 1, "tablet";
        Up = 2, "up";
        Left = 3, "left";
        Right = 4, "right";
    }
);

coded_enum!(
    SmileState {
        NotSmiling = 0, "not_smiling";
        Smiling = 1, "smiling";
        BroadlySmiling = 2, "broadly_smiling";
    }
);

coded_enum!(
    /// Correctness of the most recent answer seen before the robot acts.
    AnswerOutcome {
        Wrong = 0, "wrong";
        Correct = 1, "correct";
    }
);

coded_enum!(
    EngagementLevel {
        Low = 0, "low";
        Medium = 1, "medium";
        High = 2, "high";
    }
);

coded_enum!(
    /// The three adaptation behaviours (a0, a1, a2).
    RobotAction {
        Enthusiastic = 0, "enthusiastic";
        Neutral = 1, "neutral";
        Stimulating = 2, "stimulating";
    }
);

impl GazeDirection {
    /// Looking at the robot or at the tablet that shows the game.
    pub fn is_attentive(self) -> bool {
        matches!(self, GazeDirection::Robot | GazeDirection::Tablet)
    }
}

impl RobotAction {
    /// Short id used in CSV headers and on the command line (`a0`, `a1`, `a2`).
    pub fn short_id(self) -> &'static str {
        match self {
            RobotAction::Enthusiastic => "a0",
            RobotAction::Neutral => "a1",
            RobotAction::Stimulating => "a2",
        }
    }

    pub fn from_short_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.short_id() == id)
    }
}

/// Maps gaze and smile to an engagement level.
///
/// Additive score: an attentive gaze is worth 2, the smile contributes its
/// code. Scores up to 1 are Low, exactly 2 is Medium, 3 and above is High.
pub fn classify_engagement(gaze: GazeDirection, smile: SmileState) -> EngagementLevel {
    let gaze_score = if gaze.is_attentive() { 2 } else { 0 };
    match gaze_score + smile.code() {
        0 | 1 => EngagementLevel::Low,
        2 => EngagementLevel::Medium,
        _ => EngagementLevel::High,
    }
}

/// All (gaze, smile) pairs in `level`, in gaze-major code order.
pub fn engagement_class(level: EngagementLevel) -> Vec<(GazeDirection, SmileState)> {
    GazeDirection::ALL
        .into_iter()
        .flat_map(|g| SmileState::ALL.into_iter().map(move |s| (g, s)))
        .filter(|&(g, s)| classify_engagement(g, s) == level)
        .collect()
}

/// One sensed user snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UserObservation {
    pub gaze: GazeDirection,
    pub smile: SmileState,
    pub answer: AnswerOutcome,
}

impl UserObservation {
    pub fn new(gaze: GazeDirection, smile: SmileState, answer: AnswerOutcome) -> Self {
        Self { gaze, smile, answer }
    }

    pub fn engagement(&self) -> EngagementLevel {
        classify_engagement(self.gaze, self.smile)
    }

    /// Every observation, ordered by state index.
    pub fn all() -> impl Iterator<Item = UserObservation> {
        (0..NUM_STATES).map(|i| decode_state(i).expect("index in range"))
    }
}

impl fmt::Display for UserObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.gaze, self.smile, self.answer)
    }
}

/// Row index of `obs` in the Q-table: `gaze·6 + smile·2 + answer`.
pub fn encode_state(obs: UserObservation) -> usize {
    obs.gaze.code() * 6 + obs.smile.code() * 2 + obs.answer.code()
}

pub fn decode_state(index: usize) -> Result<UserObservation> {
    if index >= NUM_STATES {
        return Err(Error::StateOutOfRange(index));
    }
    // Codes are in range by construction once the index is.
    Ok(UserObservation {
        gaze: GazeDirection::ALL[index / 6],
        smile: SmileState::ALL[(index / 2) % 3],
        answer: AnswerOutcome::ALL[index % 2],
    })
}

/// Reward weights. The step penalty is folded into every reward so the
/// trainer and the exact solver see the same signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardParams {
    pub r_high: f64,
    pub r_medium: f64,
    pub r_low: f64,
    pub correct_bonus: f64,
    pub wrong_bonus: f64,
    pub step_penalty: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            r_high: 1.0,
            r_medium: 0.2,
            r_low: -1.0,
            correct_bonus: 0.5,
            wrong_bonus: 0.0,
            step_penalty: -0.05,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("r_high", self.r_high),
            ("r_medium", self.r_medium),
            ("r_low", self.r_low),
            ("correct_bonus", self.correct_bonus),
            ("wrong_bonus", self.wrong_bonus),
            ("step_penalty", self.step_penalty),
        ];
        if let Some((name, v)) = all.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::validation(
                format!("reward.{name}"),
                format!("{v} is not finite"),
            ));
        }
        if !(self.r_high > self.r_medium && self.r_medium > self.r_low) {
            return Err(Error::validation(
                "reward",
                format!(
                    "engagement rewards must satisfy r_high > r_medium > r_low, got {} / {} / {}",
                    self.r_high, self.r_medium, self.r_low
                ),
            ));
        }
        if self.step_penalty >= 0.0 {
            return Err(Error::validation(
                "reward.step_penalty",
                format!("must be negative, got {}", self.step_penalty),
            ));
        }
        Ok(())
    }

    pub fn engagement_component(&self, level: EngagementLevel) -> f64 {
        match level {
            EngagementLevel::Low => self.r_low,
            EngagementLevel::Medium => self.r_medium,
            EngagementLevel::High => self.r_high,
        }
    }

    pub fn answer_component(&self, answer: AnswerOutcome) -> f64 {
        match answer {
            AnswerOutcome::Wrong => self.wrong_bonus,
            AnswerOutcome::Correct => self.correct_bonus,
        }
    }

    /// Largest per-step reward magnitude these weights can produce.
    pub fn max_abs_reward(&self) -> f64 {
        UserObservation::all()
            .map(|o| compute_reward(o, self).abs())
            .fold(0.0, f64::max)
    }
}

/// Reward for landing in `next_obs`.
pub fn compute_reward(next_obs: UserObservation, params: &RewardParams) -> f64 {
    params.engagement_component(next_obs.engagement())
        + params.answer_component(next_obs.answer)
        + params.step_penalty
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use AnswerOutcome::*;
    use GazeDirection::*;
    use SmileState::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_engagement(Robot, BroadlySmiling), EngagementLevel::High);
        assert_eq!(classify_engagement(Left, NotSmiling), EngagementLevel::Low);
        assert_eq!(classify_engagement(Tablet, Smiling), EngagementLevel::High);
        assert_eq!(classify_engagement(Up, BroadlySmiling), EngagementLevel::Medium);
    }

    #[test]
    fn engagement_partition_is_6_5_4() {
        let sizes: Vec<usize> = EngagementLevel::ALL
            .iter()
            .map(|&l| engagement_class(l).len())
            .collect();
        assert_eq!(sizes, vec![6, 5, 4]);
    }

    #[test]
    fn codes_are_stable() {
        let gaze: Vec<usize> = GazeDirection::ALL.iter().map(|g| g.code()).collect();
        assert_eq!(gaze, vec![0, 1, 2, 3, 4]);
        assert_eq!(RobotAction::Stimulating.code(), 2);
        assert!(SmileState::NotSmiling < SmileState::Smiling);
        assert!(SmileState::Smiling < SmileState::BroadlySmiling);
        assert!(EngagementLevel::Low < EngagementLevel::High);
    }

    #[test]
    fn encode_decode_examples() {
        assert_eq!(encode_state(UserObservation::new(Robot, NotSmiling, Wrong)), 0);
        assert_eq!(encode_state(UserObservation::new(Right, BroadlySmiling, Correct)), 29);
        assert_eq!(
            decode_state(7).unwrap(),
            UserObservation::new(Tablet, NotSmiling, Correct)
        );
        assert!(matches!(decode_state(30), Err(Error::StateOutOfRange(30))));
    }

    #[test]
    fn encode_decode_bijection() {
        let decoded: Vec<_> = (0..NUM_STATES).map(|i| decode_state(i).unwrap()).collect();
        for (i, obs) in decoded.iter().enumerate() {
            assert_eq!(encode_state(*obs), i);
        }
        assert_eq!(decoded, UserObservation::all().collect::<Vec<_>>());
    }

    #[test]
    fn reward_examples() {
        let p = RewardParams::default();
        let r = compute_reward(UserObservation::new(Robot, Smiling, Correct), &p);
        assert!((r - 1.45).abs() < 1e-12);
        let r = compute_reward(UserObservation::new(Up, NotSmiling, Wrong), &p);
        assert!((r + 1.05).abs() < 1e-12);

        let only_penalty = RewardParams {
            r_high: 0.0,
            r_medium: 0.0,
            r_low: 0.0,
            correct_bonus: 0.0,
            wrong_bonus: 0.0,
            step_penalty: -0.05,
        };
        for obs in UserObservation::all() {
            assert_eq!(compute_reward(obs, &only_penalty), -0.05);
        }
    }

    #[test]
    fn default_max_abs_reward() {
        assert!((RewardParams::default().max_abs_reward() - 1.45).abs() < 1e-12);
    }

    #[test]
    fn reward_validation() {
        assert!(RewardParams::default().validate().is_ok());
        let bad = RewardParams {
            r_medium: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RewardParams {
            step_penalty: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    fn arb_params() -> impl Strategy<Value = RewardParams> {
        (
            -5.0..5.0f64,
            0.01..3.0f64,
            0.01..3.0f64,
            -2.0..2.0f64,
            -2.0..2.0f64,
            -1.0..-0.001f64,
        )
            .prop_map(|(low, d1, d2, cb, wb, pen)| RewardParams {
                r_low: low,
                r_medium: low + d1,
                r_high: low + d1 + d2,
                correct_bonus: cb,
                wrong_bonus: wb,
                step_penalty: pen,
            })
    }

    proptest! {
        #[test]
        fn reward_monotone_in_engagement(p in arb_params(), ans in 0usize..2) {
            let answer = AnswerOutcome::ALL[ans];
            let low = compute_reward(UserObservation::new(Left, NotSmiling, answer), &p);
            let med = compute_reward(UserObservation::new(Robot, NotSmiling, answer), &p);
            let high = compute_reward(UserObservation::new(Robot, BroadlySmiling, answer), &p);
            prop_assert!(high > med && med > low);
        }

        #[test]
        fn answer_bonus_gap(idx in 0usize..NUM_STATES) {
            let p = RewardParams::default();
            let obs = decode_state(idx).unwrap();
            let right = compute_reward(UserObservation { answer: Correct, ..obs }, &p);
            let wrong = compute_reward(UserObservation { answer: Wrong, ..obs }, &p);
            prop_assert!((right - wrong - (p.correct_bonus - p.wrong_bonus)).abs() < 1e-12);
        }
    }
}
