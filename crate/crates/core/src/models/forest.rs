use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tree::{fit_rows, DecisionTree};
use super::{check_columns, ModelError, TargetRef};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    /// Seed each tree's bootstrap and feature sampling was drawn from.
    pub tree_seeds: Vec<u64>,
    pub classification: bool,
    pub n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub seed: u64,
    /// Off only in tests, where it reduces a one-tree forest to a plain CART fit.
    pub bootstrap: bool,
}

/// Bagged CART. Regression splits consider every feature; classification
/// splits draw `ceil(sqrt(p))` candidate features per node.
pub fn rf_fit(x: &[Vec<f64>], target: &TargetRef, params: ForestParams) -> Result<RandomForest, ModelError> {
    let n = target.len();
    check_columns(x, n)?;
    target.check()?;
    if params.n_estimators == 0 {
        return Err(ModelError::InvalidSpec("n_estimators must be >= 1".into()));
    }
    let p = x.len();
    let (max_features, n_classes) = match target {
        TargetRef::Numeric(_) => (None, 0),
        TargetRef::Classes { n_classes, .. } => (Some((p as f64).sqrt().ceil() as usize), *n_classes),
    };
    let mut seeder = ChaCha8Rng::seed_from_u64(params.seed);
    let tree_seeds: Vec<u64> = (0..params.n_estimators).map(|_| seeder.gen()).collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let rows = if params.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            fit_rows(x, target, rows, params.max_depth, max_features, &mut rng)
        })
        .collect();
    Ok(RandomForest { trees, tree_seeds, classification: target.is_classes(), n_classes })
}

impl RandomForest {
    pub fn parameter_count(&self) -> usize {
        self.trees.iter().map(DecisionTree::parameter_count).sum()
    }

    pub fn n_features(&self) -> usize {
        self.trees.first().map_or(0, |t| t.n_features)
    }

    /// Mean of tree outputs, or the majority class code (ties to the smaller code).
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.n_features() {
            return Err(ModelError::FeatureMismatch { expected: self.n_features(), found: x.len() });
        }
        let n = x.first().map_or(0, Vec::len);
        let out = (0..n)
            .map(|r| {
                if self.classification {
                    let mut votes = vec![0usize; self.n_classes];
                    for t in &self.trees {
                        votes[t.predict_row(x, r) as usize] += 1;
                    }
                    let mut best = 0;
                    for (k, &v) in votes.iter().enumerate() {
                        if v > votes[best] {
                            best = k;
                        }
                    }
                    best as f64
                } else {
                    self.trees.iter().map(|t| t.predict_row(x, r)).sum::<f64>() / self.trees.len() as f64
                }
            })
            .collect();
        Ok(out)
    }
}
