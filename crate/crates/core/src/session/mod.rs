//! The cooking-quiz session: stage machine, recipe content, episode runner
//! and batch evaluation.

mod episode;
mod evaluate;
mod recipe;
mod stage;

pub use episode::{
    is_engaged, run_episode, Respondent, RoundRecord, SessionContext, SessionLog, SessionTotals,
    SimulatedUser,
};
pub use evaluate::{evaluate_policy, Evaluation, EvaluationSummary};
pub use recipe::{Ingredient, Question, Recipe, DEFAULT_RECIPE_TOML, RECIPE_SCHEMA_VERSION};
pub use stage::{advance_stage, GameStage, StageMachine, QUESTIONS_PER_SESSION};
