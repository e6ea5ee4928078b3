//! Engagement-driven behaviour adaptation for a socially assistive robot.
//!
//! A tabular Q-learning agent picks one of three robot behaviours
//! (enthusiastic, neutral, stimulating) from the user's gaze, smile and
//! last answer during an eight-question cooking quiz. Simulated healthy and
//! MCI users provide the training signal; an exact value-iteration solver
//! checks what the agent learned; the behaviour renderer turns each chosen
//! action into a personality-specific robot behaviour record.

pub mod behavior;
pub mod config;
pub mod error;
pub mod mdp;
pub mod qlearning;
pub mod rng;
pub mod session;
pub mod user_sim;

pub use error::{Error, Result};
