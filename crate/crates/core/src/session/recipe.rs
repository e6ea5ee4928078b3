use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::QUESTIONS_PER_SESSION;

pub const RECIPE_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_RECIPE_TOML: &str = include_str!("../../fixtures/cooking.recipe");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ingredient {
    pub name: String,
    pub weight_g: f64,
    /// 1-based position in the preparation sequence.
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Question {
    pub prompt: String,
    pub options: Vec<String>,
    pub correct_index: usize,
}

impl Question {
    pub fn is_correct(&self, option: usize) -> bool {
        option == self.correct_index
    }

    /// Deterministic wrong choice used by simulated users.
    pub fn wrong_option(&self) -> usize {
        (self.correct_index + 1) % self.options.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub name: String,
    pub ingredients: Vec<Ingredient>,
    pub questions: Vec<Question>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecipeDoc {
    schema_version: u32,
    name: String,
    ingredients: Vec<Ingredient>,
    questions: Vec<Question>,
}

impl Default for Recipe {
    fn default() -> Self {
        Self::from_toml(DEFAULT_RECIPE_TOML, "cooking.recipe").expect("shipped fixture is valid")
    }
}

impl Recipe {
    pub fn from_toml(text: &str, source_name: &str) -> Result<Self> {
        let doc: RecipeDoc = toml::from_str(text).map_err(|e| Error::parse(source_name, e))?;
        if doc.schema_version != RECIPE_SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!(
                    "unsupported version {} (expected {RECIPE_SCHEMA_VERSION})",
                    doc.schema_version
                ),
            ));
        }
        let recipe = Recipe {
            name: doc.name,
            ingredients: doc.ingredients,
            questions: doc.questions,
        };
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.questions.len() != QUESTIONS_PER_SESSION {
            return Err(Error::validation(
                "questions",
                format!(
                    "expected exactly {QUESTIONS_PER_SESSION} questions, found {}",
                    self.questions.len()
                ),
            ));
        }
        let mut ranks: Vec<usize> = self.ingredients.iter().map(|i| i.order).collect();
        ranks.sort_unstable();
        if ranks.iter().enumerate().any(|(i, &r)| r != i + 1) {
            return Err(Error::validation(
                "ingredients.order",
                format!("ranks must be a permutation of 1..={}", self.ingredients.len()),
            ));
        }
        if let Some(i) = self.ingredients.iter().find(|i| !i.weight_g.is_finite() || i.weight_g <= 0.0) {
            return Err(Error::validation(
                format!("ingredients[{}].weight_g", i.name),
                "must be positive",
            ));
        }
        for (n, q) in self.questions.iter().enumerate() {
            if q.options.len() < 2 {
                return Err(Error::validation(
                    format!("questions[{n}].options"),
                    "needs at least two options",
                ));
            }
            if q.correct_index >= q.options.len() {
                return Err(Error::validation(
                    format!("questions[{n}].correct_index"),
                    format!("{} is out of range for {} options", q.correct_index, q.options.len()),
                ));
            }
        }
        Ok(())
    }

    /// Ingredients in preparation order.
    pub fn ordered_ingredients(&self) -> Vec<&Ingredient> {
        let mut v: Vec<&Ingredient> = self.ingredients.iter().collect();
        v.sort_by_key(|i| i.order);
        v
    }
}
