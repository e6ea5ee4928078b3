use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of question/answer rounds in one game.
pub const QUESTIONS_PER_SESSION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStage {
    Introduction,
    RecipeInstruction,
    Question,
    Answer,
    EndingFeedback,
}

impl GameStage {
    pub const ALL: [GameStage; 5] = [
        GameStage::Introduction,
        GameStage::RecipeInstruction,
        GameStage::Question,
        GameStage::Answer,
        GameStage::EndingFeedback,
    ];
}

/// The unique legal successor of `current`.
///
/// `rounds_completed` counts answered questions, including the one just
/// answered when `current` is `Answer`.
pub fn advance_stage(current: GameStage, rounds_completed: usize) -> Result<GameStage> {
    if rounds_completed > QUESTIONS_PER_SESSION {
        return Err(Error::validation(
            "rounds_completed",
            format!("{rounds_completed} exceeds {QUESTIONS_PER_SESSION}"),
        ));
    }
    use GameStage::*;
    match current {
        Introduction => Ok(RecipeInstruction),
        RecipeInstruction => Ok(Question),
        Question if rounds_completed < QUESTIONS_PER_SESSION => Ok(Answer),
        Question => Err(Error::IllegalTransition {
            from: Question,
            to: Answer,
            rounds: rounds_completed,
        }),
        Answer if rounds_completed < QUESTIONS_PER_SESSION => Ok(Question),
        Answer => Ok(EndingFeedback),
        EndingFeedback => Err(Error::TerminalStage(EndingFeedback)),
    }
}

/// Tracks the stage and completed rounds of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageMachine {
    stage: GameStage,
    rounds_completed: usize,
}

impl Default for StageMachine {
    fn default() -> Self {
        Self::new()
    }
}

impl StageMachine {
    pub fn new() -> Self {
        Self {
            stage: GameStage::Introduction,
            rounds_completed: 0,
        }
    }

    pub fn stage(&self) -> GameStage {
        self.stage
    }

    pub fn rounds_completed(&self) -> usize {
        self.rounds_completed
    }

    pub fn is_finished(&self) -> bool {
        self.stage == GameStage::EndingFeedback
    }

    pub fn advance(&mut self) -> Result<GameStage> {
        let next = advance_stage(self.stage, self.rounds_completed)?;
        if next == GameStage::Answer {
            self.rounds_completed += 1;
        }
        self.stage = next;
        Ok(next)
    }

    /// Moves to `target` if that is the legal successor; state is unchanged
    /// on error.
    pub fn transition_to(&mut self, target: GameStage) -> Result<()> {
        let legal = advance_stage(self.stage, self.rounds_completed)?;
        if legal != target {
            return Err(Error::IllegalTransition {
                from: self.stage,
                to: target,
                rounds: self.rounds_completed,
            });
        }
        self.advance().map(|_| ())
    }
}
