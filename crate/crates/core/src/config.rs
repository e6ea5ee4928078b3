//! Experiment configuration: one TOML document tying the trainer, the
//! reward weights and the fixture files together.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::behavior::{BehaviorCatalog, PersonalityProfile};
use crate::error::{Error, Result};
use crate::mdp::RewardParams;
use crate::qlearning::TrainingConfig;
use crate::session::Recipe;
use crate::user_sim::UserModel;

pub const EXPERIMENT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_EXPERIMENT_TOML: &str = include_str!("../fixtures/experiment.toml");

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub training: TrainingConfig,
    pub reward: RewardParams,
    /// `None` selects the built-in healthy model.
    pub model: Option<PathBuf>,
    pub recipe: Option<PathBuf>,
    pub behavior: Option<PathBuf>,
    pub personality: String,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            training: TrainingConfig::default(),
            reward: RewardParams::default(),
            model: None,
            recipe: None,
            behavior: None,
            personality: "Extraverted".into(),
            seed: 42,
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentDoc {
    schema_version: u32,
    #[serde(default)]
    training: TrainingConfig,
    #[serde(default)]
    reward: RewardParams,
    model: Option<PathBuf>,
    recipe: Option<PathBuf>,
    behavior: Option<PathBuf>,
    personality: Option<String>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config document; relative paths resolve against `base_dir`.
    pub fn from_toml(text: &str, source_name: &str, base_dir: &Path) -> Result<Self> {
        let doc: ExperimentDoc = toml::from_str(text).map_err(|e| Error::parse(source_name, e))?;
        if doc.schema_version != EXPERIMENT_SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!(
                    "unsupported version {} (expected {EXPERIMENT_SCHEMA_VERSION})",
                    doc.schema_version
                ),
            ));
        }
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let defaults = Self::default();
        let cfg = Self {
            training: doc.training,
            reward: doc.reward,
            model: doc.model.map(resolve),
            recipe: doc.recipe.map(resolve),
            behavior: doc.behavior.map(resolve),
            personality: doc.personality.unwrap_or(defaults.personality),
            seed: doc.seed.unwrap_or(defaults.seed),
            out_dir: doc.out_dir.map(resolve).unwrap_or(defaults.out_dir),
        };
        cfg.training.validate()?;
        cfg.reward.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, &path.display().to_string(), base)
    }

    /// Loads and validates every referenced file.
    pub fn load(&self) -> Result<Experiment> {
        self.training.validate()?;
        self.reward.validate()?;
        let model = match &self.model {
            Some(p) => UserModel::from_path(p)?,
            None => UserModel::healthy(),
        };
        let recipe = match &self.recipe {
            Some(p) => Recipe::from_path(p)?,
            None => Recipe::default(),
        };
        let catalog = match &self.behavior {
            Some(p) => BehaviorCatalog::from_path(p)?,
            None => BehaviorCatalog::default(),
        };
        let personality = catalog.load_personality(&self.personality)?;
        Ok(Experiment {
            config: self.clone(),
            model,
            recipe,
            catalog,
            personality,
        })
    }
}

/// A validated config with its files loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: UserModel,
    pub recipe: Recipe,
    pub catalog: BehaviorCatalog,
    pub personality: PersonalityProfile,
}
