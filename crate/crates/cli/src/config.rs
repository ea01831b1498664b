use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use featurecraft_core::gp::{GpConfig, GpMode, OperatorProbs, RegressionSecond};
use featurecraft_core::llmfeat::EndpointConfig;
use featurecraft_core::models::{ModelKind, ModelSpec};
use serde::{Deserialize, Serialize};

/// The seven experiment pipelines: a plain model, or a GP wrapper around one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    BaselineRidge,
    BaselineDt,
    BaselineRf,
    M3gpRidge,
    M6gpRidge,
    M3gpRf,
    M6gpRf,
}

impl Pipeline {
    pub const ALL: [Pipeline; 7] = [
        Pipeline::BaselineRidge,
        Pipeline::BaselineDt,
        Pipeline::BaselineRf,
        Pipeline::M3gpRidge,
        Pipeline::M6gpRidge,
        Pipeline::M3gpRf,
        Pipeline::M6gpRf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::BaselineRidge => "baseline-ridge",
            Pipeline::BaselineDt => "baseline-dt",
            Pipeline::BaselineRf => "baseline-rf",
            Pipeline::M3gpRidge => "m3gp-ridge",
            Pipeline::M6gpRidge => "m6gp-ridge",
            Pipeline::M3gpRf => "m3gp-rf",
            Pipeline::M6gpRf => "m6gp-rf",
        }
    }

    pub fn model(self) -> ModelKind {
        match self {
            Pipeline::BaselineRidge | Pipeline::M3gpRidge | Pipeline::M6gpRidge => ModelKind::Ridge,
            Pipeline::BaselineDt => ModelKind::DecisionTree,
            Pipeline::BaselineRf | Pipeline::M3gpRf | Pipeline::M6gpRf => ModelKind::RandomForest,
        }
    }

    /// `None` for the baselines.
    pub fn gp_mode(self) -> Option<GpMode> {
        match self {
            Pipeline::M3gpRidge | Pipeline::M3gpRf => Some(GpMode::M3gp),
            Pipeline::M6gpRidge | Pipeline::M6gpRf => Some(GpMode::M6gp),
            _ => None,
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Pipeline::ALL.iter().map(|p| p.name()).collect();
            format!("unknown pipeline '{s}' (expected one of {})", names.join(", "))
        })
    }
}

/// Generations used when the config leaves them unset: 100 around Ridge, 30 around trees.
pub fn default_generations(model: ModelKind) -> usize {
    match model {
        ModelKind::Ridge => 100,
        ModelKind::DecisionTree | ModelKind::RandomForest => 30,
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Directory name under `out`.
    pub name: String,
    pub dataset: PathBuf,
    pub recipe: Option<PathBuf>,
    pub pipeline: Pipeline,
    pub trials: usize,
    pub train_ratio: f64,
    pub base_seed: u64,
    /// GP parameters; `gp.model` is the wrapped (or baseline) model.
    pub gp: GpConfig,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            bail!("trials must be >= 1");
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            bail!("train_ratio must be in (0, 1), got {}", self.train_ratio);
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            bail!("experiment name '{}' is not a valid directory name", self.name);
        }
        self.gp.validate().map_err(|e| anyhow::anyhow!("{e}"))
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    pub fn experiment_dir(&self) -> PathBuf {
        self.out.join(&self.name)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    name: Option<String>,
    dataset: Option<PathBuf>,
    recipe: Option<PathBuf>,
    pipeline: Option<String>,
    trials: Option<usize>,
    train_ratio: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GpSection {
    population_size: Option<usize>,
    generations: Option<usize>,
    init_depth: Option<usize>,
    depth_limit: Option<usize>,
    tournament_size: Option<usize>,
    regression_second: Option<RegressionSecond>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    ridge_lambda: Option<f64>,
    max_depth: Option<usize>,
    n_estimators: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LlmSection {
    #[serde(flatten)]
    endpoint: EndpointConfig,
    transcripts: Option<PathBuf>,
}

/// Sectioned TOML config: `[experiment]`, `[gp]`, `[operators]`, `[model]`, `[llm]`.
/// Every key is optional; relative paths resolve against the file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    experiment: ExperimentSection,
    #[serde(default)]
    gp: GpSection,
    #[serde(default)]
    operators: Option<OperatorProbs>,
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    llm: Option<LlmSection>,
}

/// Command-line values, which take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub recipe: Option<PathBuf>,
    pub pipeline: Option<Pipeline>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub offline: bool,
}

impl ConfigFile {
    pub fn parse(text: &str, base_dir: &Path) -> Result<ConfigFile> {
        let mut cfg: ConfigFile = toml::from_str(text).context("invalid config")?;
        let e = &mut cfg.experiment;
        for p in [&mut e.dataset, &mut e.recipe, &mut e.out] {
            if let Some(path) = p.as_mut() {
                *path = base_dir.join(&*path);
            }
        }
        if let Some(t) = cfg.llm.as_mut().and_then(|l| l.transcripts.as_mut()) {
            *t = base_dir.join(&*t);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        ConfigFile::parse(&text, path.parent().unwrap_or(Path::new(".")))
            .with_context(|| format!("in {}", path.display()))
    }

    pub fn endpoint(&self, ov: &Overrides) -> EndpointConfig {
        let mut e = self.llm.as_ref().map(|l| l.endpoint.clone()).unwrap_or_default();
        e.offline |= ov.offline;
        e
    }

    pub fn transcripts_dir(&self) -> PathBuf {
        self.llm.as_ref().and_then(|l| l.transcripts.clone()).unwrap_or_else(|| PathBuf::from("transcripts"))
    }

    pub fn resolve(&self, ov: &Overrides) -> Result<ExperimentConfig> {
        let e = &self.experiment;
        let dataset = ov.dataset.clone().or_else(|| e.dataset.clone()).context("no dataset manifest given")?;
        let recipe = ov.recipe.clone().or_else(|| e.recipe.clone());
        let pipeline = match (ov.pipeline, &e.pipeline) {
            (Some(p), _) => p,
            (None, Some(s)) => s.parse().map_err(anyhow::Error::msg)?,
            (None, None) => Pipeline::BaselineRidge,
        };
        let kind = pipeline.model();
        let defaults = ModelSpec::of_kind(kind);
        let m = &self.model;
        let model = ModelSpec {
            ridge_lambda: m.ridge_lambda.unwrap_or(defaults.ridge_lambda),
            max_depth: m.max_depth.unwrap_or(defaults.max_depth),
            n_estimators: m.n_estimators.unwrap_or(defaults.n_estimators),
            ..defaults
        };
        let g = &self.gp;
        let base = GpConfig::default();
        let gp = GpConfig {
            mode: pipeline.gp_mode().unwrap_or(base.mode),
            population_size: g.population_size.unwrap_or(base.population_size),
            generations: g.generations.unwrap_or_else(|| default_generations(kind)),
            init_depth: g.init_depth.unwrap_or(base.init_depth),
            depth_limit: g.depth_limit.unwrap_or(base.depth_limit),
            tournament_size: g.tournament_size.unwrap_or(base.tournament_size),
            operators: self.operators.unwrap_or(base.operators),
            model,
            regression_second: g.regression_second.unwrap_or(base.regression_second),
            seed: 0,
        };
        let name = match &e.name {
            Some(n) => n.clone(),
            None => {
                let stem = dataset.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned());
                let suffix = if recipe.is_some() { "-recipe" } else { "" };
                format!("{stem}-{pipeline}{suffix}")
            }
        };
        let cfg = ExperimentConfig {
            name,
            dataset,
            recipe,
            pipeline,
            trials: ov.trials.or(e.trials).unwrap_or(30),
            train_ratio: e.train_ratio.unwrap_or(0.7),
            base_seed: ov.seed.or(e.seed).unwrap_or(0),
            gp,
            out: ov.out.clone().or_else(|| e.out.clone()).unwrap_or_else(|| PathBuf::from("results")),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
