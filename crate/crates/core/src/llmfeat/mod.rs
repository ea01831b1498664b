//! Stage one of the pipeline: the two-question prompt conversation, an
//! optional chat-completion client, transcript storage, and curated recipe files.
//!
//! LLM answers are never compiled into recipes automatically; a person reads
//! the stored transcript and writes the recipe file.

mod client;
mod transcript;

use std::fmt;
use std::path::Path;

use crate::exprlang::{FeatureRecipe, RecipeError};

pub use client::{request_recommendations, ChatMessage, EndpointConfig, DEFAULT_API_KEY_ENV};
pub use transcript::{LlmTranscript, TranscriptStore, Turn};

/// The fixed follow-up question.
pub const FOLLOW_UP: &str = "Are there any combination of features that might improve the results?";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptPair {
    pub prompt1: String,
    pub prompt2: String,
    pub dataset_name: String,
    pub objective_phrase: String,
    pub feature_names: Vec<String>,
}

#[derive(Debug)]
pub enum LlmError {
    EmptyObjective,
    NoFeatures,
    Offline,
    MissingCredential(String),
    Network(String),
    Auth { status: u16, body: String },
    Status { status: u16, body: String },
    BadResponse(String),
    Io(std::io::Error),
    Recipe(Vec<RecipeError>),
}

impl fmt::Display for LlmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LlmError::EmptyObjective => write!(f, "objective phrase is empty"),
            LlmError::NoFeatures => write!(f, "at least one feature name is required"),
            LlmError::Offline => write!(f, "offline: use a curated recipe file"),
            LlmError::MissingCredential(var) => write!(f, "API credential not set (environment variable {var})"),
            LlmError::Network(m) => write!(f, "network error: {m}"),
            LlmError::Auth { status, body } => write!(f, "authentication failed (HTTP {status}): {body}"),
            LlmError::Status { status, body } => write!(f, "endpoint returned HTTP {status}: {body}"),
            LlmError::BadResponse(body) => write!(f, "unexpected response body: {body}"),
            LlmError::Io(e) => write!(f, "transcript store: {e}"),
            LlmError::Recipe(errs) => {
                let msgs: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
                write!(f, "{}", msgs.join("; "))
            }
        }
    }
}

impl std::error::Error for LlmError {}

impl From<std::io::Error> for LlmError {
    fn from(e: std::io::Error) -> Self {
        LlmError::Io(e)
    }
}

/// "I want to [objective] in a dataset with the following features: [names]. Which features should I use?"
pub fn build_prompts<S: AsRef<str>>(
    dataset_name: &str,
    objective_phrase: &str,
    feature_names: &[S],
) -> Result<PromptPair, LlmError> {
    let objective = objective_phrase.trim();
    if objective.is_empty() {
        return Err(LlmError::EmptyObjective);
    }
    if feature_names.is_empty() {
        return Err(LlmError::NoFeatures);
    }
    let names: Vec<String> = feature_names.iter().map(|s| s.as_ref().to_string()).collect();
    let prompt1 = format!(
        "I want to {objective} in a dataset with the following features: {}. Which features should I use?",
        names.join(", ")
    );
    Ok(PromptPair {
        prompt1,
        prompt2: FOLLOW_UP.to_string(),
        dataset_name: dataset_name.to_string(),
        objective_phrase: objective.to_string(),
        feature_names: names,
    })
}

/// Reads and parses a recipe file; an empty file is an empty recipe.
pub fn load_recipe(path: &Path) -> Result<FeatureRecipe, LlmError> {
    let text = std::fs::read_to_string(path)?;
    FeatureRecipe::parse(&text).map_err(|e| LlmError::Recipe(vec![e]))
}

pub fn validate_recipe<S: AsRef<str>>(recipe: &FeatureRecipe, schema: &[S]) -> Result<(), LlmError> {
    recipe.validate(schema).map_err(LlmError::Recipe)
}
