//! Multi-tree genetic programming (M3GP single-objective, M6GP two-objective).
//!
//! An [`Individual`] is an ordered list of expression trees; applying it to a
//! dataset yields one engineered column per tree. Fitness wraps a learner from
//! [`crate::models`]: the transformed training data is split once per run into
//! two halves, a model is fitted on each half and scored on the other, and
//! the two scores are averaged.

mod evolve;
mod fitness;
mod operators;
mod selection;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DataError, Dataset};
use crate::exprlang::{eval_column, random_full, EvalError, ExprTree};
use crate::models::{Metric, ModelError, ModelSpec};

pub use evolve::{evolve, evolve_observed, EvolveOutcome, GenerationRecord, GenerationView, RunLog};
pub use fitness::{evaluate_fitness, test_score, FitnessContext};
pub use operators::{
    crossover_swap_subtree, crossover_swap_tree, mutate_add_tree, mutate_remove_tree, mutate_subtree, Operator,
    OperatorProbs,
};
pub use selection::{best_index, dominates, double_tournament, pareto_fronts, tournament};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GpMode {
    M3gp,
    M6gp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// One fitness objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// 2-fold score of the wrapped model.
    Metric(Metric),
    /// Total node count over all trees.
    Size,
}

impl Objective {
    pub fn direction(self) -> Direction {
        match self {
            Objective::Metric(m) if m.maximize() => Direction::Maximize,
            _ => Direction::Minimize,
        }
    }
}

/// Second M6GP objective for regression. Classification always uses size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionSecond {
    Mae,
    MaxAbsErr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpConfig {
    pub mode: GpMode,
    pub population_size: usize,
    pub generations: usize,
    /// Depth of full trees created at initialization and by mutation.
    pub init_depth: usize,
    /// Offspring with any deeper tree are replaced by a parent copy.
    pub depth_limit: usize,
    pub tournament_size: usize,
    pub operators: OperatorProbs,
    pub model: ModelSpec,
    pub regression_second: RegressionSecond,
    pub seed: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            mode: GpMode::M3gp,
            population_size: 500,
            generations: 100,
            init_depth: 6,
            depth_limit: 17,
            tournament_size: 5,
            operators: OperatorProbs::default(),
            model: ModelSpec::default(),
            regression_second: RegressionSecond::Mae,
            seed: 0,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |m: String| Err(GpError::InvalidConfig(m));
        if self.population_size == 0 {
            return bad("population_size must be >= 1".into());
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be >= 1".into());
        }
        if self.init_depth == 0 || self.depth_limit < self.init_depth {
            return bad(format!("need 1 <= init_depth ({}) <= depth_limit ({})", self.init_depth, self.depth_limit));
        }
        self.operators.validate()?;
        self.model.validate().map_err(|e| GpError::InvalidConfig(e.to_string()))
    }

    /// Objectives for this mode on a regression or classification task.
    pub fn objectives(&self, classification: bool) -> Vec<Objective> {
        let primary = Objective::Metric(if classification { Metric::Waf } else { Metric::Rmse });
        match self.mode {
            GpMode::M3gp => vec![primary],
            GpMode::M6gp if classification => vec![primary, Objective::Size],
            GpMode::M6gp => vec![
                primary,
                Objective::Metric(match self.regression_second {
                    RegressionSecond::Mae => Metric::Mae,
                    RegressionSecond::MaxAbsErr => Metric::MaxAbsErr,
                }),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    pub objectives: Vec<(f64, Direction)>,
    pub tiebreak_size: usize,
}

impl FitnessVector {
    pub fn value(&self, i: usize) -> f64 {
        self.objectives[i].0
    }

    /// `Less` when `self` is better than `other` on objective `i`.
    pub fn cmp_on(&self, other: &FitnessVector, i: usize) -> Ordering {
        let (a, dir) = self.objectives[i];
        let b = other.objectives[i].0;
        match dir {
            Direction::Minimize => a.total_cmp(&b),
            Direction::Maximize => b.total_cmp(&a),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub trees: Vec<ExprTree>,
    pub fitness: Option<FitnessVector>,
}

impl Individual {
    pub fn new(trees: Vec<ExprTree>) -> Individual {
        Individual { trees, fitness: None }
    }

    pub fn dimensionality(&self) -> usize {
        self.trees.len()
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        self.trees.iter().map(ExprTree::size).sum()
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(ExprTree::depth).max().unwrap_or(0)
    }

    /// Fitness of an evaluated individual. Panics otherwise: selection and
    /// elitism only ever run on fully evaluated populations.
    pub fn fit(&self) -> &FitnessVector {
        self.fitness.as_ref().expect("individual must be evaluated")
    }

    pub fn to_text(&self) -> Vec<String> {
        self.trees.iter().map(ExprTree::to_text).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GpError {
    InvalidConfig(String),
    EmptySchema,
    DegenerateFold(String),
    MixedArity,
    Eval { generation: usize, source: EvalError },
    Model { generation: usize, source: ModelError },
    Data(DataError),
}

impl fmt::Display for GpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpError::InvalidConfig(m) => write!(f, "invalid GP config: {m}"),
            GpError::EmptySchema => write!(f, "dataset has no features to build trees from"),
            GpError::DegenerateFold(m) => write!(f, "degenerate fitness fold: {m}"),
            GpError::MixedArity => write!(f, "population mixes fitness vectors of different arity"),
            GpError::Eval { generation, source } => write!(f, "generation {generation}: {source}"),
            GpError::Model { generation, source } => write!(f, "generation {generation}: {source}"),
            GpError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for GpError {}

/// Feature names as shared leaf labels.
pub fn schema_of(data: &Dataset) -> Vec<Arc<str>> {
    data.feature_names().iter().map(|s| Arc::from(s.as_str())).collect()
}

/// `population_size` individuals, each a single full tree of depth `init_depth`.
pub fn init_population<R: Rng + ?Sized>(
    cfg: &GpConfig,
    schema: &[Arc<str>],
    rng: &mut R,
) -> Result<Vec<Individual>, GpError> {
    (0..cfg.population_size)
        .map(|_| {
            random_full(cfg.init_depth, schema, rng).map(|t| Individual::new(vec![t])).ok_or(GpError::EmptySchema)
        })
        .collect()
}

/// Engineered dataset: one column `t1..td` per tree, target copied through.
pub fn transform(ind: &Individual, data: &Dataset) -> Result<Dataset, GpError> {
    let columns = ind
        .trees
        .iter()
        .map(|t| eval_column(t, data))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| GpError::Eval { generation: 0, source })?;
    let names = (1..=columns.len()).map(|i| format!("t{i}")).collect();
    data.with_features(names, columns).map_err(GpError::Data)
}
