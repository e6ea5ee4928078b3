use std::io::Write;

use serde::Serialize;

use crate::behavior::{BehaviorCatalog, BehaviorSpec, PersonalityProfile};
use crate::error::Result;
use crate::mdp::{
    compute_reward, encode_state, AnswerOutcome, EngagementLevel, RewardParams, RobotAction,
    UserObservation,
};
use crate::qlearning::Policy;
use crate::rng::RngStream;
use crate::user_sim::{sample_initial_state, step_user, UserModel};

use super::{GameStage, Question, Recipe, StageMachine};

/// Everything fixed for the lifetime of one session. The personality is
/// chosen once, before the session starts.
#[derive(Debug, Clone, Copy)]
pub struct SessionContext<'a> {
    pub recipe: &'a Recipe,
    pub catalog: &'a BehaviorCatalog,
    pub personality: &'a PersonalityProfile,
    pub reward: &'a RewardParams,
}

/// The user side of a session: a simulated model or a live operator.
///
/// Returning `None` from an input method aborts the session.
pub trait Respondent {
    fn label(&self) -> String;

    /// Observation taken while the robot greets the user.
    fn initial_observation(&mut self, rng: &mut RngStream) -> Option<UserObservation>;

    /// The user's answer to `question` after the robot performed `action`.
    /// Returns the new observation and the chosen option index.
    fn answer(
        &mut self,
        question_index: usize,
        question: &Question,
        current: UserObservation,
        action: RobotAction,
        rng: &mut RngStream,
    ) -> Option<(UserObservation, usize)>;

    fn on_stage(&mut self, _stage: GameStage, _recipe: &Recipe) {}

    /// Called each time the robot reacts to an observation.
    fn on_robot_behavior(&mut self, _observation: UserObservation, _spec: &BehaviorSpec) {}
}

/// A [`UserModel`] driving the session. A wrong answer picks the option
/// after the correct one, so answering costs no extra draws.
pub struct SimulatedUser<'a> {
    pub model: &'a UserModel,
}

impl Respondent for SimulatedUser<'_> {
    fn label(&self) -> String {
        self.model.name.clone()
    }

    fn initial_observation(&mut self, rng: &mut RngStream) -> Option<UserObservation> {
        Some(sample_initial_state(self.model, rng))
    }

    fn answer(
        &mut self,
        _question_index: usize,
        question: &Question,
        current: UserObservation,
        action: RobotAction,
        rng: &mut RngStream,
    ) -> Option<(UserObservation, usize)> {
        let next = step_user(self.model, current, action, rng);
        let option = match next.answer {
            AnswerOutcome::Correct => question.correct_index,
            AnswerOutcome::Wrong => question.wrong_option(),
        };
        Some((next, option))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub question_index: usize,
    pub observation_before: UserObservation,
    pub action_taken: RobotAction,
    pub behavior_spec_id: String,
    pub answer_given: usize,
    pub reward: f64,
    pub observation_after: UserObservation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SessionTotals {
    pub correct_count: usize,
    pub cumulative_reward: f64,
    /// Rounds ending at each engagement level (low, medium, high).
    pub engagement_histogram: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionLog {
    pub personality: String,
    pub user: String,
    pub rounds: Vec<RoundRecord>,
    pub totals: SessionTotals,
    /// False when the respondent aborted before the last round.
    pub complete: bool,
    /// Feedback given on the last answer during the ending stage.
    pub ending_behavior_spec_id: Option<String>,
}

impl SessionLog {
    fn new(personality: &str, user: String) -> Self {
        Self {
            personality: personality.to_string(),
            user,
            rounds: Vec::new(),
            totals: SessionTotals::default(),
            complete: false,
            ending_behavior_spec_id: None,
        }
    }

    fn push(&mut self, record: RoundRecord) {
        if record.observation_after.answer == AnswerOutcome::Correct {
            self.totals.correct_count += 1;
        }
        self.totals.cumulative_reward += record.reward;
        self.totals.engagement_histogram[record.observation_after.engagement().code()] += 1;
        self.rounds.push(record);
    }

    /// Fraction of rounds that ended at Medium or High engagement.
    pub fn engaged_fraction(&self) -> f64 {
        if self.rounds.is_empty() {
            return 0.0;
        }
        let [_, medium, high] = self.totals.engagement_histogram;
        (medium + high) as f64 / self.rounds.len() as f64
    }

    /// Writes one JSON line per round followed by a summary line.
    pub fn write_jsonl<W: Write>(&self, episode: u64, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        #[serde(tag = "kind", rename_all = "snake_case")]
        enum Line<'a> {
            Round {
                episode: u64,
                #[serde(flatten)]
                record: &'a RoundRecord,
            },
            Summary {
                episode: u64,
                personality: &'a str,
                user: &'a str,
                complete: bool,
                rounds: usize,
                #[serde(flatten)]
                totals: &'a SessionTotals,
                ending_behavior_spec_id: &'a Option<String>,
            },
        }
        for record in &self.rounds {
            serde_json::to_writer(&mut out, &Line::Round { episode, record })
                .map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        let summary = Line::Summary {
            episode,
            personality: &self.personality,
            user: &self.user,
            complete: self.complete,
            rounds: self.rounds.len(),
            totals: &self.totals,
            ending_behavior_spec_id: &self.ending_behavior_spec_id,
        };
        serde_json::to_writer(&mut out, &summary).map_err(std::io::Error::from)?;
        writeln!(out)?;
        Ok(())
    }
}

/// Plays one full game.
///
/// Each round the robot acts on the current observation (its feedback on
/// the previous answer), the question is asked, and the user's answer gives
/// the next observation and the round's reward. After the last answer the
/// robot gives one more, unlogged, feedback during the ending stage.
pub fn run_episode(
    policy: &dyn Policy,
    user: &mut dyn Respondent,
    ctx: &SessionContext<'_>,
    rng: &mut RngStream,
) -> Result<SessionLog> {
    let mut log = SessionLog::new(&ctx.personality.name, user.label());
    let mut stages = StageMachine::new();
    user.on_stage(GameStage::Introduction, ctx.recipe);

    let Some(mut obs) = user.initial_observation(rng) else {
        return Ok(log);
    };

    user.on_stage(stages.advance()?, ctx.recipe);
    stages.advance()?;

    for (i, question) in ctx.recipe.questions.iter().enumerate() {
        debug_assert_eq!(stages.stage(), GameStage::Question);
        let action = policy.choose(encode_state(obs), rng);
        let spec = ctx.catalog.render(action, ctx.personality, obs.answer);
        user.on_robot_behavior(obs, &spec);
        user.on_stage(GameStage::Question, ctx.recipe);

        let Some((next, option)) = user.answer(i, question, obs, action, rng) else {
            return Ok(log);
        };
        stages.advance()?;
        log.push(RoundRecord {
            question_index: i,
            observation_before: obs,
            action_taken: action,
            behavior_spec_id: spec.id,
            answer_given: option,
            reward: compute_reward(next, ctx.reward),
            observation_after: next,
        });
        obs = next;
        stages.advance()?;
    }

    debug_assert!(stages.is_finished());
    let action = policy.choose(encode_state(obs), rng);
    let spec = ctx.catalog.render(action, ctx.personality, obs.answer);
    user.on_robot_behavior(obs, &spec);
    user.on_stage(GameStage::EndingFeedback, ctx.recipe);
    log.ending_behavior_spec_id = Some(spec.id);
    log.complete = true;
    Ok(log)
}

/// Engagement level counts as "engaged" for reporting purposes.
pub fn is_engaged(level: EngagementLevel) -> bool {
    level >= EngagementLevel::Medium
}
