//! Experiment harness for the LLM-recipe + GP feature engineering pipeline:
//! prompt generation, dataset augmentation, repeated trials, comparison
//! reports and convergence-curve data.

pub mod config;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use featurecraft_core::data::{Dataset, DatasetManifest, Target};
use featurecraft_core::llmfeat::{
    build_prompts, request_recommendations, EndpointConfig, LlmTranscript, PromptPair, TranscriptStore,
};

pub use config::{ConfigFile, ExperimentConfig, Overrides, Pipeline};
pub use report::{cmd_plotdata, cmd_report, plot_csv, Comparison, Marker, PlotRow};
pub use run::{cmd_run, cmd_run_with, ExperimentResult, TrialResult};

pub struct SuggestOutcome {
    pub prompts: PromptPair,
    /// The conversation and where it was saved, when the endpoint was called.
    pub transcript: Option<(LlmTranscript, PathBuf)>,
}

/// Builds the two prompts for a manifest and, unless offline, asks the endpoint.
pub fn cmd_suggest(manifest: &Path, endpoint: &EndpointConfig, transcripts: &Path) -> Result<SuggestOutcome> {
    let m = DatasetManifest::load(manifest).context("loading manifest")?;
    let names = m.feature_names()?;
    let prompts = build_prompts(&m.name, &m.objective, &names)?;
    let transcript = if endpoint.offline {
        None
    } else {
        Some(request_recommendations(endpoint, &prompts, &TranscriptStore::new(transcripts))?)
    };
    Ok(SuggestOutcome { prompts, transcript })
}

/// Writes the manifest's dataset with the recipe's columns appended; the
/// target stays last under its original name.
pub fn cmd_augment(manifest: &Path, recipe: &Path, out: &Path) -> Result<Dataset> {
    let target_name = DatasetManifest::load(manifest)?.target;
    let data = run::prepare_dataset(manifest, Some(recipe))?;
    let mut w = csv::Writer::from_path(out).with_context(|| format!("creating {}", out.display()))?;
    let mut header: Vec<&str> = data.feature_names().iter().map(String::as_str).collect();
    header.push(&target_name);
    w.write_record(&header)?;
    for row in 0..data.n_rows() {
        let mut rec: Vec<String> = data.columns().iter().map(|c| c[row].to_string()).collect();
        rec.push(match data.target() {
            Target::Numeric(y) => y[row].to_string(),
            Target::Labels(l) => l[row].clone(),
        });
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(data)
}
