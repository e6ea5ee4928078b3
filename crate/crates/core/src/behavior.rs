//! Turns an adaptation action into a declarative robot behaviour under the
//! session's personality. Nothing here talks to a robot; a client consumes
//! the [`BehaviorSpec`] records.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{AnswerOutcome, RobotAction};
use crate::rng::RngStream;

pub const BEHAVIOR_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_BEHAVIOR_TOML: &str = include_str!("../fixtures/behavior.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonalityProfile {
    pub name: String,
    pub volume_mult: f64,
    pub speech_rate_mult: f64,
    pub pitch_mult: f64,
    pub gesture_amplitude: f64,
    pub gesture_frequency: f64,
    pub proactivity: f64,
}

impl PersonalityProfile {
    fn key(&self) -> String {
        self.name.to_lowercase()
    }

    fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("personality[{}].{f}", self.name);
        if self.name.trim().is_empty() {
            return Err(Error::validation("personality.name", "must not be empty"));
        }
        for (f, v) in [
            ("volume_mult", self.volume_mult),
            ("speech_rate_mult", self.speech_rate_mult),
            ("pitch_mult", self.pitch_mult),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field(f), format!("must be positive, got {v}")));
            }
        }
        for (f, v) in [
            ("gesture_amplitude", self.gesture_amplitude),
            ("gesture_frequency", self.gesture_frequency),
            ("proactivity", self.proactivity),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(field(f), format!("must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// True when every expressive parameter is strictly above `other`'s.
    pub fn strictly_more_expressive_than(&self, other: &PersonalityProfile) -> bool {
        self.volume_mult > other.volume_mult
            && self.speech_rate_mult > other.speech_rate_mult
            && self.pitch_mult > other.pitch_mult
            && self.gesture_amplitude > other.gesture_amplitude
            && self.gesture_frequency > other.gesture_frequency
            && self.proactivity > other.proactivity
    }
}

/// How an action scales the personality's baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionModifier {
    pub volume: f64,
    pub speech_rate: f64,
    pub pitch: f64,
    pub gesture_amplitude: f64,
    pub animation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSpec {
    /// `personality/action/outcome/variant`, e.g. `extraverted/a0/correct/0`.
    pub id: String,
    pub utterance: String,
    pub volume_mult: f64,
    pub speech_rate_mult: f64,
    pub pitch_mult: f64,
    pub animation_tag: String,
    pub gesture_amplitude: f64,
    pub action: RobotAction,
    pub personality: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Lines {
    correct: Vec<String>,
    wrong: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PerAction<T> {
    enthusiastic: T,
    neutral: T,
    stimulating: T,
}

impl<T> PerAction<T> {
    fn into_array(self) -> [T; 3] {
        [self.enthusiastic, self.neutral, self.stimulating]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    schema_version: u32,
    personality: Vec<PersonalityProfile>,
    actions: PerAction<ActionModifier>,
    utterances: BTreeMap<String, PerAction<Lines>>,
}

/// Template lines indexed `[action][outcome]`.
type TemplateGrid = [[Vec<String>; 2]; 3];

/// Personalities, action modifiers and feedback templates.
#[derive(Debug, Clone)]
pub struct BehaviorCatalog {
    personalities: Vec<PersonalityProfile>,
    modifiers: [ActionModifier; 3],
    templates: BTreeMap<String, TemplateGrid>,
}

impl Default for BehaviorCatalog {
    fn default() -> Self {
        Self::from_toml(DEFAULT_BEHAVIOR_TOML, "behavior.toml").expect("shipped fixture is valid")
    }
}

impl BehaviorCatalog {
    pub fn from_toml(text: &str, source_name: &str) -> Result<Self> {
        let doc: CatalogDoc = toml::from_str(text).map_err(|e| Error::parse(source_name, e))?;
        if doc.schema_version != BEHAVIOR_SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!(
                    "unsupported version {} (expected {BEHAVIOR_SCHEMA_VERSION})",
                    doc.schema_version
                ),
            ));
        }
        let templates = doc
            .utterances
            .into_iter()
            .map(|(k, per_action)| {
                let grid = per_action.into_array().map(|l| [l.wrong, l.correct]);
                (k.to_lowercase(), grid)
            })
            .collect();
        let catalog = Self {
            personalities: doc.personality,
            modifiers: doc.actions.into_array(),
            templates,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    fn validate(&self) -> Result<()> {
        if self.personalities.is_empty() {
            return Err(Error::validation("personality", "at least one is required"));
        }
        for p in &self.personalities {
            p.validate()?;
            let Some(grid) = self.templates.get(&p.key()) else {
                return Err(Error::validation(
                    format!("utterances.{}", p.key()),
                    "missing templates for this personality",
                ));
            };
            for action in RobotAction::ALL {
                for outcome in AnswerOutcome::ALL {
                    let lines = &grid[action.code()][outcome.code()];
                    if lines.is_empty() || lines.iter().any(|l| l.trim().is_empty()) {
                        return Err(Error::validation(
                            format!("utterances.{}.{action}.{outcome}", p.key()),
                            "needs at least one non-empty line",
                        ));
                    }
                }
            }
        }
        for (action, m) in RobotAction::ALL.iter().zip(&self.modifiers) {
            for (f, v) in [
                ("volume", m.volume),
                ("speech_rate", m.speech_rate),
                ("pitch", m.pitch),
                ("gesture_amplitude", m.gesture_amplitude),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::validation(
                        format!("actions.{action}.{f}"),
                        format!("must be positive, got {v}"),
                    ));
                }
            }
            if m.animation.trim().is_empty() {
                return Err(Error::validation(
                    format!("actions.{action}.animation"),
                    "must not be empty",
                ));
            }
        }
        if let (Ok(ext), Ok(int)) = (
            self.load_personality("extraverted"),
            self.load_personality("introverted"),
        ) {
            if !ext.strictly_more_expressive_than(&int) {
                return Err(Error::validation(
                    "personality",
                    "Extraverted must exceed Introverted on every expressive parameter",
                ));
            }
        }
        Ok(())
    }

    pub fn personalities(&self) -> &[PersonalityProfile] {
        &self.personalities
    }

    pub fn modifier(&self, action: RobotAction) -> &ActionModifier {
        &self.modifiers[action.code()]
    }

    /// Case-insensitive lookup.
    pub fn load_personality(&self, name: &str) -> Result<PersonalityProfile> {
        let key = name.trim().to_lowercase();
        self.personalities
            .iter()
            .find(|p| p.key() == key)
            .cloned()
            .ok_or_else(|| Error::UnknownPersonality(name.to_string()))
    }

    fn lines(
        &self,
        action: RobotAction,
        personality: &PersonalityProfile,
        outcome: AnswerOutcome,
    ) -> (&str, &[String]) {
        // Profiles built outside the catalog borrow the first personality's lines.
        let (key, grid) = self
            .templates
            .get_key_value(&personality.key())
            .unwrap_or_else(|| {
                let first = self.personalities[0].key();
                self.templates.get_key_value(&first).expect("validated")
            });
        (key, &grid[action.code()][outcome.code()])
    }

    /// Renders the default (first) template line.
    pub fn render(
        &self,
        action: RobotAction,
        personality: &PersonalityProfile,
        outcome: AnswerOutcome,
    ) -> BehaviorSpec {
        self.render_variant(action, personality, outcome, 0)
    }

    /// Renders a uniformly chosen template line (one draw).
    pub fn render_random(
        &self,
        action: RobotAction,
        personality: &PersonalityProfile,
        outcome: AnswerOutcome,
        rng: &mut RngStream,
    ) -> BehaviorSpec {
        let n = self.lines(action, personality, outcome).1.len();
        self.render_variant(action, personality, outcome, rng.next_index(n))
    }

    /// Renders template line `variant`, wrapping around the available lines.
    pub fn render_variant(
        &self,
        action: RobotAction,
        personality: &PersonalityProfile,
        outcome: AnswerOutcome,
        variant: usize,
    ) -> BehaviorSpec {
        let (key, lines) = self.lines(action, personality, outcome);
        let variant = variant % lines.len();
        let m = self.modifier(action);
        BehaviorSpec {
            id: format!("{key}/{}/{outcome}/{variant}", action.short_id()),
            utterance: lines[variant].clone(),
            volume_mult: personality.volume_mult * m.volume,
            speech_rate_mult: personality.speech_rate_mult * m.speech_rate,
            pitch_mult: personality.pitch_mult * m.pitch,
            animation_tag: m.animation.clone(),
            gesture_amplitude: (personality.gesture_amplitude * m.gesture_amplitude).clamp(0.0, 1.0),
            action,
            personality: personality.name.clone(),
        }
    }
}
