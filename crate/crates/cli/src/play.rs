use std::io::{self, BufRead, Write};

use sar_adapt::behavior::{BehaviorSpec, PersonalityProfile};
use sar_adapt::config::Experiment;
use sar_adapt::mdp::{AnswerOutcome, GazeDirection, SmileState, UserObservation};
use sar_adapt::qlearning::{ConstantPolicy, Policy, TablePolicy};
use sar_adapt::rng::RngStream;
use sar_adapt::session::{run_episode, GameStage, Question, Recipe, SessionContext, SessionLog};

use crate::{load_experiment, load_qtable, qtable_path, PlayArgs, EXIT_OK};

pub fn run(args: &PlayArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> anyhow::Result<i32> {
    let exp = load_experiment(&args.common)?;
    let policy: Box<dyn Policy> = match args.baseline {
        Some(action) => Box::new(ConstantPolicy(action)),
        None => Box::new(TablePolicy::greedy(&load_qtable(&qtable_path(&args.qtable, &exp))?)),
    };
    run_play(&exp, policy.as_ref(), input, out)?;
    Ok(EXIT_OK)
}

/// Reads lines until `parse` accepts one. `Ok(None)` on end of input.
fn prompt<T>(
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    question: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> io::Result<Option<T>> {
    let mut line = String::new();
    loop {
        write!(out, "{question}")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(None);
        }
        match parse(line.trim()) {
            Ok(v) => return Ok(Some(v)),
            Err(msg) => writeln!(out, "invalid entry {:?}: {msg}; try again", line.trim())?,
        }
    }
}

fn parse_code<T: Copy>(
    text: &str,
    all: &[T],
    label: impl Fn(T) -> &'static str,
) -> Result<T, String> {
    if let Ok(n) = text.parse::<usize>() {
        return all.get(n).copied().ok_or_else(|| format!("code must be 0..={}", all.len() - 1));
    }
    all.iter()
        .copied()
        .find(|v| label(*v).eq_ignore_ascii_case(text))
        .ok_or_else(|| "not a known code or name".to_string())
}

fn menu<T: Copy>(all: &[T], label: impl Fn(T) -> &'static str) -> String {
    all.iter()
        .enumerate()
        .map(|(i, v)| format!("{i} {}", label(*v)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// The person at the terminal standing in for the robot's perception: they
/// type the gaze and smile codes they observe and the option the player
/// picked.
pub struct LiveOperator<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    /// First write or read failure; ends the session.
    pub io_error: Option<io::Error>,
}

impl<'a> LiveOperator<'a> {
    pub fn new(input: &'a mut dyn BufRead, out: &'a mut dyn Write) -> Self {
        Self {
            input,
            out,
            io_error: None,
        }
    }

    fn ask<T>(&mut self, question: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        if self.io_error.is_some() {
            return None;
        }
        match prompt(self.input, self.out, question, parse) {
            Ok(v) => v,
            Err(e) => {
                self.io_error = Some(e);
                None
            }
        }
    }

    fn say(&mut self, text: std::fmt::Arguments<'_>) {
        if self.io_error.is_none() {
            if let Err(e) = self.out.write_fmt(text).and_then(|_| writeln!(self.out)) {
                self.io_error = Some(e);
            }
        }
    }

    fn read_face(&mut self) -> Option<(GazeDirection, SmileState)> {
        let gaze = self.ask(
            &format!("gaze [{}]: ", menu(&GazeDirection::ALL, GazeDirection::label)),
            |t| parse_code(t, &GazeDirection::ALL, GazeDirection::label),
        )?;
        let smile = self.ask(
            &format!("smile [{}]: ", menu(&SmileState::ALL, SmileState::label)),
            |t| parse_code(t, &SmileState::ALL, SmileState::label),
        )?;
        Some((gaze, smile))
    }
}

impl sar_adapt::session::Respondent for LiveOperator<'_> {
    fn label(&self) -> String {
        "live".into()
    }

    fn initial_observation(&mut self, _rng: &mut RngStream) -> Option<UserObservation> {
        self.say(format_args!("Observe the player while the robot introduces itself."));
        let (gaze, smile) = self.read_face()?;
        Some(UserObservation::new(gaze, smile, AnswerOutcome::Correct))
    }

    fn answer(
        &mut self,
        question_index: usize,
        question: &Question,
        _current: UserObservation,
        _action: sar_adapt::mdp::RobotAction,
        _rng: &mut RngStream,
    ) -> Option<(UserObservation, usize)> {
        self.say(format_args!("\nQuestion {}: {}", question_index + 1, question.prompt));
        for (i, option) in question.options.iter().enumerate() {
            self.say(format_args!("  {i}) {option}"));
        }
        let n = question.options.len();
        let option = self.ask(&format!("chosen option [0-{}]: ", n - 1), |t| {
            t.parse::<usize>()
                .ok()
                .filter(|&i| i < n)
                .ok_or_else(|| format!("enter a number from 0 to {}", n - 1))
        })?;
        let (gaze, smile) = self.read_face()?;
        let answer = if question.is_correct(option) {
            AnswerOutcome::Correct
        } else {
            AnswerOutcome::Wrong
        };
        Some((UserObservation::new(gaze, smile, answer), option))
    }

    fn on_stage(&mut self, stage: GameStage, recipe: &Recipe) {
        match stage {
            GameStage::Introduction => {
                self.say(format_args!("== Cooking game: {} ==", recipe.name));
            }
            GameStage::RecipeInstruction => {
                self.say(format_args!("Recipe: {}", recipe.name));
                for i in recipe.ordered_ingredients() {
                    self.say(format_args!("  {}. {} ({} g)", i.order, i.name, i.weight_g));
                }
            }
            GameStage::EndingFeedback => self.say(format_args!("== End of the game ==")),
            GameStage::Question | GameStage::Answer => {}
        }
    }

    fn on_robot_behavior(&mut self, obs: UserObservation, spec: &BehaviorSpec) {
        self.say(format_args!(
            "engagement: {} (gaze {}, smile {}, last answer {})",
            obs.engagement(),
            obs.gaze,
            obs.smile,
            obs.answer
        ));
        self.say(format_args!("robot action: {} ({})", spec.action.short_id(), spec.action));
        self.say(format_args!("behavior {}", spec.id));
        self.say(format_args!("  personality: {}", spec.personality));
        self.say(format_args!("  utterance: \"{}\"", spec.utterance));
        self.say(format_args!(
            "  volume x{:.3}, speech rate x{:.3}, pitch x{:.3}",
            spec.volume_mult, spec.speech_rate_mult, spec.pitch_mult
        ));
        self.say(format_args!(
            "  animation: {}, gesture amplitude {:.3}",
            spec.animation_tag, spec.gesture_amplitude
        ));
    }
}

fn choose_personality(
    exp: &Experiment,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> io::Result<Option<PersonalityProfile>> {
    let names: Vec<&str> = exp.catalog.personalities().iter().map(|p| p.name.as_str()).collect();
    let question = format!(
        "personality [{}] (empty for {}): ",
        names.join("/"),
        exp.personality.name
    );
    prompt(input, out, &question, |t| {
        if t.is_empty() {
            return Ok(exp.personality.clone());
        }
        exp.catalog.load_personality(t).map_err(|e| e.to_string())
    })
}

/// Runs one interactive session. The personality is chosen first and stays
/// fixed; end of input aborts and the partial log is returned.
pub fn run_play(
    exp: &Experiment,
    policy: &dyn Policy,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> anyhow::Result<SessionLog> {
    let Some(personality) = choose_personality(exp, input, out)? else {
        writeln!(out, "no personality selected; session aborted")?;
        return Ok(SessionLog {
            personality: String::new(),
            user: "live".into(),
            rounds: Vec::new(),
            totals: Default::default(),
            complete: false,
            ending_behavior_spec_id: None,
        });
    };
    let ctx = SessionContext {
        recipe: &exp.recipe,
        catalog: &exp.catalog,
        personality: &personality,
        reward: &exp.config.reward,
    };
    let mut rng = RngStream::new(exp.config.seed);
    let mut operator = LiveOperator::new(input, out);
    let log = run_episode(policy, &mut operator, &ctx, &mut rng)?;
    if let Some(e) = operator.io_error {
        return Err(e.into());
    }
    print_summary(&log, out)?;
    Ok(log)
}

fn print_summary(log: &SessionLog, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out)?;
    if log.complete {
        writeln!(out, "session complete")?;
    } else {
        writeln!(out, "session aborted after {} of 8 rounds", log.rounds.len())?;
    }
    writeln!(out, "personality: {}, user: {}", log.personality, log.user)?;
    for r in &log.rounds {
        writeln!(
            out,
            "  round {}: {} -> {} | answer {} | reward {:+.2} | {}",
            r.question_index + 1,
            r.observation_before,
            r.action_taken.short_id(),
            r.answer_given,
            r.reward,
            r.observation_after
        )?;
    }
    let t = &log.totals;
    writeln!(out, "rounds: {}", log.rounds.len())?;
    writeln!(out, "correct answers: {}", t.correct_count)?;
    writeln!(out, "cumulative reward: {:.4}", t.cumulative_reward)?;
    writeln!(
        out,
        "engagement rounds: low {}, medium {}, high {}",
        t.engagement_histogram[0], t.engagement_histogram[1], t.engagement_histogram[2]
    )?;
    Ok(())
}
