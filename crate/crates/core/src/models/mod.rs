//! Wrapped learners: ridge (regressor and one-vs-rest classifier), CART and random forest.
//!
//! Feature matrices are column-major, `x[feature][row]`, matching
//! [`Dataset::columns`](crate::data::Dataset::columns). Class labels are
//! integer codes `0..n_classes`; [`ClassCoder`] maps them to and from the
//! dataset's label strings.

mod forest;
mod ridge;
mod text;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics;

pub use forest::{rf_fit, ForestParams, RandomForest};
pub use ridge::{argmax_rows, normal_equation_residual, ridge_classify_fit, ridge_fit, RidgeModel};
pub use tree::{best_split, dt_fit, fit_rows, DecisionTree, Node, SplitChoice};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Empty,
    NoFeatures,
    NonFinite,
    TooFewClasses,
    LengthMismatch { expected: usize, found: usize },
    FeatureMismatch { expected: usize, found: usize },
    InvalidSpec(String),
    Numerical(String),
    Parse { line: usize, message: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Empty => write!(f, "model needs at least one training row"),
            ModelError::NoFeatures => write!(f, "model needs at least one feature"),
            ModelError::NonFinite => write!(f, "non-finite value in model inputs"),
            ModelError::TooFewClasses => write!(f, "classifier needs >= 2 classes in the training data"),
            ModelError::LengthMismatch { expected, found } => {
                write!(f, "feature column has {found} rows, target has {expected}")
            }
            ModelError::FeatureMismatch { expected, found } => {
                write!(f, "model was fitted on {expected} features, got {found}")
            }
            ModelError::InvalidSpec(m) => write!(f, "invalid model spec: {m}"),
            ModelError::Numerical(m) => write!(f, "linear solve failed: {m}"),
            ModelError::Parse { line, message } => write!(f, "model text line {line}: {message}"),
        }
    }
}

impl std::error::Error for ModelError {}

/// Training target: numeric values or class codes.
#[derive(Debug, Clone, Copy)]
pub enum TargetRef<'a> {
    Numeric(&'a [f64]),
    Classes { codes: &'a [usize], n_classes: usize },
}

impl TargetRef<'_> {
    pub fn len(&self) -> usize {
        match self {
            TargetRef::Numeric(y) => y.len(),
            TargetRef::Classes { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_classes(&self) -> bool {
        matches!(self, TargetRef::Classes { .. })
    }

    fn check(&self) -> Result<(), ModelError> {
        match self {
            TargetRef::Numeric(y) if y.iter().any(|v| !v.is_finite()) => Err(ModelError::NonFinite),
            TargetRef::Classes { codes, n_classes } if codes.iter().any(|c| c >= n_classes) => {
                Err(ModelError::InvalidSpec(format!("class code out of range 0..{n_classes}")))
            }
            _ => Ok(()),
        }
    }
}

fn check_columns(x: &[Vec<f64>], n: usize) -> Result<(), ModelError> {
    if n == 0 {
        return Err(ModelError::Empty);
    }
    if x.is_empty() {
        return Err(ModelError::NoFeatures);
    }
    for c in x {
        if c.len() != n {
            return Err(ModelError::LengthMismatch { expected: n, found: c.len() });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ridge,
    DecisionTree,
    RandomForest,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ridge" => Ok(ModelKind::Ridge),
            "decision_tree" | "dt" => Ok(ModelKind::DecisionTree),
            "random_forest" | "rf" => Ok(ModelKind::RandomForest),
            _ => Err(format!("unknown model kind '{s}'")),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Ridge => "ridge",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub ridge_lambda: f64,
    /// Split levels; 0 yields a constant predictor.
    pub max_depth: usize,
    pub n_estimators: usize,
    pub seed: u64,
    #[serde(skip)]
    pub bootstrap: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { kind: ModelKind::Ridge, ridge_lambda: 1.0, max_depth: 6, n_estimators: 100, seed: 0, bootstrap: true }
    }
}

impl ModelSpec {
    pub fn of_kind(kind: ModelKind) -> ModelSpec {
        ModelSpec { kind, ..ModelSpec::default() }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(ModelError::InvalidSpec(format!("ridge_lambda must be >= 0, got {}", self.ridge_lambda)));
        }
        if self.n_estimators == 0 {
            return Err(ModelError::InvalidSpec("n_estimators must be >= 1".into()));
        }
        Ok(())
    }

    pub fn fit(&self, x: &[Vec<f64>], target: &TargetRef) -> Result<FittedModel, ModelError> {
        self.validate()?;
        Ok(match (self.kind, target) {
            (ModelKind::Ridge, TargetRef::Numeric(y)) => FittedModel::Ridge(ridge_fit(x, y, self.ridge_lambda)?),
            (ModelKind::Ridge, TargetRef::Classes { codes, n_classes }) => {
                FittedModel::RidgeClassifier(ridge_classify_fit(x, codes, *n_classes, self.ridge_lambda)?)
            }
            (ModelKind::DecisionTree, t) => FittedModel::Tree(dt_fit(x, t, self.max_depth)?),
            (ModelKind::RandomForest, t) => FittedModel::Forest(rf_fit(
                x,
                t,
                ForestParams {
                    n_estimators: self.n_estimators,
                    max_depth: self.max_depth,
                    seed: self.seed,
                    bootstrap: self.bootstrap,
                },
            )?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Numeric(Vec<f64>),
    Classes(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Ridge(RidgeModel),
    RidgeClassifier(RidgeModel),
    Tree(DecisionTree),
    Forest(RandomForest),
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Ridge(_) | FittedModel::RidgeClassifier(_) => ModelKind::Ridge,
            FittedModel::Tree(_) => ModelKind::DecisionTree,
            FittedModel::Forest(_) => ModelKind::RandomForest,
        }
    }

    pub fn is_classifier(&self) -> bool {
        match self {
            FittedModel::Ridge(_) => false,
            FittedModel::RidgeClassifier(_) => true,
            FittedModel::Tree(t) => t.classification,
            FittedModel::Forest(f) => f.classification,
        }
    }

    /// Learned values: weights + intercepts for ridge, leaf values for trees.
    pub fn parameter_count(&self) -> usize {
        match self {
            FittedModel::Ridge(m) | FittedModel::RidgeClassifier(m) => m.parameter_count(),
            FittedModel::Tree(t) => t.parameter_count(),
            FittedModel::Forest(f) => f.parameter_count(),
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Predictions, ModelError> {
        let raw = match self {
            FittedModel::Ridge(m) => return Ok(Predictions::Numeric(m.scores(x)?.swap_remove(0))),
            FittedModel::RidgeClassifier(m) => return Ok(Predictions::Classes(argmax_rows(&m.scores(x)?))),
            FittedModel::Tree(t) => t.predict(x)?,
            FittedModel::Forest(f) => f.predict(x)?,
        };
        Ok(if self.is_classifier() {
            Predictions::Classes(raw.into_iter().map(|v| v as usize).collect())
        } else {
            Predictions::Numeric(raw)
        })
    }

    pub fn to_text(&self) -> String {
        text::write_model(self)
    }

    pub fn from_text(s: &str) -> Result<FittedModel, ModelError> {
        text::read_model(s)
    }
}

/// Sorted label set of a training target, mapping labels to codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCoder {
    pub classes: Vec<String>,
}

impl ClassCoder {
    pub fn from_labels(labels: &[String]) -> ClassCoder {
        let mut classes = labels.to_vec();
        classes.sort();
        classes.dedup();
        ClassCoder { classes }
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Labels missing from the coder map to `n_classes()`, a code no model predicts.
    pub fn encode(&self, labels: &[String]) -> Vec<usize> {
        labels.iter().map(|l| self.classes.binary_search(l).unwrap_or(self.classes.len())).collect()
    }

    pub fn decode(&self, codes: &[usize]) -> Vec<String> {
        codes.iter().map(|&c| self.classes.get(c).cloned().unwrap_or_default()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rmse,
    Mae,
    MaxAbsErr,
    Waf,
}

impl Metric {
    pub fn maximize(self) -> bool {
        self == Metric::Waf
    }

    /// Value standing in for a model that could not be fitted or produced no usable output.
    pub fn worst(self) -> f64 {
        if self.maximize() {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::Mae => "mae",
            Metric::MaxAbsErr => "max_abs_err",
            Metric::Waf => "waf",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum TruthRef<'a> {
    Numeric(&'a [f64]),
    Classes(&'a [usize]),
}

/// Scores predictions against the truth. Mismatched kinds score as the metric's worst value.
pub fn score(metric: Metric, truth: TruthRef, pred: &Predictions) -> f64 {
    let v = match (metric, truth, pred) {
        (Metric::Rmse, TruthRef::Numeric(y), Predictions::Numeric(p)) => metrics::rmse(y, p),
        (Metric::Mae, TruthRef::Numeric(y), Predictions::Numeric(p)) => metrics::mae(y, p),
        (Metric::MaxAbsErr, TruthRef::Numeric(y), Predictions::Numeric(p)) => metrics::max_abs_err(y, p),
        (Metric::Waf, TruthRef::Classes(y), Predictions::Classes(p)) => metrics::waf(y, p),
        _ => return metric.worst(),
    };
    match v {
        Ok(s) if s.is_finite() => s,
        _ => metric.worst(),
    }
}
