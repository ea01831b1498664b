use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use featurecraft_core::data::{augment, split, Dataset, DatasetManifest, TaskKind};
use featurecraft_core::exprlang::ExprTree;
use featurecraft_core::gp::{evolve, test_score, GenerationRecord, GpConfig, Individual, RunLog};
use featurecraft_core::llmfeat::{load_recipe, validate_recipe};
use featurecraft_core::metrics::{summarize, ScoreReport};
use featurecraft_core::models::Metric;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Pipeline};

pub const RESULT_FILE: &str = "result.json";
pub const RUNLOG_FILE: &str = "runlog.jsonl";
pub const ERROR_FILE: &str = "error.txt";
pub const SUMMARY_FILE: &str = "summary.json";

/// Outcome of one completed trial, persisted as `trial_<i>/result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub test_score: f64,
    /// Columns handed to the pipeline, after any recipe augmentation.
    pub input_features: usize,
    /// Columns the final model was fitted on.
    pub dimensionality: usize,
    /// Total node count of the evolved trees; absent for baselines.
    pub size: Option<usize>,
    pub model_parameters: usize,
    /// Evolved trees in expression syntax; absent for baselines.
    pub trees: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: String,
}

/// Aggregate of an experiment, persisted as `summary.json`. Per-trial lists
/// have one entry per trial, `None` where the trial failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub dataset: String,
    pub pipeline: Pipeline,
    pub recipe: Option<String>,
    pub metric: Metric,
    pub trials: usize,
    pub base_seed: u64,
    pub train_ratio: f64,
    pub test_scores: Vec<Option<f64>>,
    pub dimensionality: Vec<Option<usize>>,
    pub sizes: Vec<Option<usize>>,
    pub model_parameters: Vec<Option<usize>>,
    pub report: Option<ScoreReport>,
    pub median_dimensionality: Option<f64>,
    pub failures: Vec<TrialFailure>,
}

impl ExperimentResult {
    pub fn load(dir: &Path) -> Result<ExperimentResult> {
        let path = dir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Successful trial scores in trial order.
    pub fn scores(&self) -> Vec<f64> {
        self.test_scores.iter().flatten().copied().collect()
    }
}

pub fn trial_dir(exp_dir: &Path, trial: usize) -> PathBuf {
    exp_dir.join(format!("trial_{trial}"))
}

/// Loads the manifest's dataset and applies the recipe, if any.
pub fn prepare_dataset(manifest: &Path, recipe: Option<&Path>) -> Result<Dataset> {
    let m = DatasetManifest::load(manifest)?;
    let data = m.load_dataset().with_context(|| format!("dataset '{}'", m.name))?;
    match recipe {
        None => Ok(data),
        Some(path) => {
            let r = load_recipe(path).with_context(|| format!("recipe {}", path.display()))?;
            validate_recipe(&r, data.feature_names()).with_context(|| format!("recipe {}", path.display()))?;
            Ok(augment(&data, &r)?)
        }
    }
}

fn metric_for(task: TaskKind) -> Metric {
    match task {
        TaskKind::Regression => Metric::Rmse,
        TaskKind::Classification => Metric::Waf,
    }
}

/// Splits with the trial seed, runs the pipeline on the training part and
/// scores the final model on the untouched test part.
pub fn run_trial(cfg: &ExperimentConfig, data: &Dataset, trial: usize) -> Result<(TrialResult, RunLog)> {
    let seed = cfg.trial_seed(trial);
    let parts = split(data, cfg.train_ratio, seed)?;
    let metric = metric_for(data.task());
    let model = featurecraft_core::models::ModelSpec { seed, ..cfg.gp.model };
    let input_features = data.n_features();
    match cfg.pipeline.gp_mode() {
        None => {
            let identity = Individual::new(data.feature_names().iter().map(|n| ExprTree::feature(n.as_str())).collect());
            let (score, params) = test_score(&identity, &parts.train, &parts.test, &model, metric)?;
            let log = RunLog {
                records: vec![GenerationRecord {
                    generation: 0,
                    best_objectives: Vec::new(),
                    test_metric: Some(score),
                    size: identity.size(),
                    dimensionality: input_features,
                    wall_ms: 0,
                }],
            };
            let result = TrialResult {
                trial,
                seed,
                test_score: score,
                input_features,
                dimensionality: input_features,
                size: None,
                model_parameters: params,
                trees: None,
            };
            Ok((result, log))
        }
        Some(mode) => {
            let gp = GpConfig { mode, seed, model, ..cfg.gp.clone() };
            let out = evolve(&gp, &parts.train, Some(&parts.test))?;
            let result = TrialResult {
                trial,
                seed,
                test_score: out.test_score.ok_or_else(|| anyhow!("no test score"))?,
                input_features,
                dimensionality: out.best.dimensionality(),
                size: Some(out.best.size()),
                model_parameters: out.model_parameters.unwrap_or(0),
                trees: Some(out.best.to_text()),
            };
            Ok((result, out.log))
        }
    }
}

/// Runs (or resumes) one trial and persists it. A trial counts as done when
/// its result file exists; the run log is written first so a present result
/// implies a present log.
fn trial_artifacts(cfg: &ExperimentConfig, data: &Dataset, trial: usize) -> Result<TrialResult> {
    let dir = trial_dir(&cfg.experiment_dir(), trial);
    let result_path = dir.join(RESULT_FILE);
    if result_path.exists() {
        let text = fs::read_to_string(&result_path)?;
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", result_path.display()));
    }
    fs::create_dir_all(&dir)?;
    match run_trial(cfg, data, trial) {
        Ok((result, log)) => {
            fs::write(dir.join(RUNLOG_FILE), log.to_jsonl())?;
            fs::write(&result_path, serde_json::to_string_pretty(&result)? + "\n")?;
            let _ = fs::remove_file(dir.join(ERROR_FILE));
            Ok(result)
        }
        Err(e) => {
            let msg = format!("{e:#}");
            fs::write(dir.join(ERROR_FILE), format!("{msg}\n"))?;
            Err(anyhow!(msg))
        }
    }
}

/// [`cmd_run_with`] without progress reporting.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cmd_run_with(cfg, &|_, _| {})
}

/// Runs every trial (in parallel, each with its own seed and directory),
/// skipping those already completed, and writes `summary.json`. Trial
/// failures are recorded in the summary rather than aborting the run.
pub fn cmd_run_with(
    cfg: &ExperimentConfig,
    on_trial: &(dyn Fn(usize, &Result<TrialResult>) + Sync),
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let manifest = DatasetManifest::load(&cfg.dataset)?;
    let data = prepare_dataset(&cfg.dataset, cfg.recipe.as_deref())?;
    let exp_dir = cfg.experiment_dir();
    fs::create_dir_all(&exp_dir).with_context(|| format!("creating {}", exp_dir.display()))?;

    let outcomes: Vec<Result<TrialResult>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let r = trial_artifacts(cfg, &data, i);
            on_trial(i, &r);
            r
        })
        .collect();

    let mut result = ExperimentResult {
        experiment: cfg.name.clone(),
        dataset: manifest.name,
        pipeline: cfg.pipeline,
        recipe: cfg.recipe.as_ref().and_then(|p| p.file_name()).map(|s| s.to_string_lossy().into_owned()),
        metric: metric_for(data.task()),
        trials: cfg.trials,
        base_seed: cfg.base_seed,
        train_ratio: cfg.train_ratio,
        test_scores: Vec::new(),
        dimensionality: Vec::new(),
        sizes: Vec::new(),
        model_parameters: Vec::new(),
        report: None,
        median_dimensionality: None,
        failures: Vec::new(),
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(t) => {
                result.test_scores.push(Some(t.test_score));
                result.dimensionality.push(Some(t.dimensionality));
                result.sizes.push(t.size);
                result.model_parameters.push(Some(t.model_parameters));
            }
            Err(e) => {
                result.test_scores.push(None);
                result.dimensionality.push(None);
                result.sizes.push(None);
                result.model_parameters.push(None);
                result.failures.push(TrialFailure { trial: i, error: format!("{e:#}") });
            }
        }
    }
    result.report = summarize(&result.scores()).ok();
    let dims: Vec<f64> = result.dimensionality.iter().flatten().map(|&d| d as f64).collect();
    result.median_dimensionality = summarize(&dims).ok().map(|r| r.median);
    fs::write(exp_dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&result)? + "\n")?;
    Ok(result)
}
