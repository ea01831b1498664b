use rand::seq::SliceRandom;
use rand::Rng;

use super::{FitnessVector, GpError, Individual, Objective};
use crate::data::{Dataset, Target};
use crate::exprlang::eval_column;
use crate::models::{score, ClassCoder, Metric, ModelError, ModelKind, ModelSpec, TargetRef, TruthRef};

#[derive(Debug, Clone)]
enum CodedTarget {
    Numeric(Vec<f64>),
    Classes { codes: Vec<usize>, n_classes: usize },
}

impl CodedTarget {
    fn of(target: &Target) -> (CodedTarget, Option<ClassCoder>) {
        match target {
            Target::Numeric(y) => (CodedTarget::Numeric(y.clone()), None),
            Target::Labels(l) => {
                let coder = ClassCoder::from_labels(l);
                (CodedTarget::Classes { codes: coder.encode(l), n_classes: coder.n_classes() }, Some(coder))
            }
        }
    }

    fn select(&self, rows: &[usize]) -> CodedTarget {
        match self {
            CodedTarget::Numeric(y) => CodedTarget::Numeric(rows.iter().map(|&r| y[r]).collect()),
            CodedTarget::Classes { codes, n_classes } => {
                CodedTarget::Classes { codes: rows.iter().map(|&r| codes[r]).collect(), n_classes: *n_classes }
            }
        }
    }

    fn as_ref(&self) -> TargetRef<'_> {
        match self {
            CodedTarget::Numeric(y) => TargetRef::Numeric(y),
            CodedTarget::Classes { codes, n_classes } => TargetRef::Classes { codes, n_classes: *n_classes },
        }
    }

    fn truth(&self) -> TruthRef<'_> {
        match self {
            CodedTarget::Numeric(y) => TruthRef::Numeric(y),
            CodedTarget::Classes { codes, .. } => TruthRef::Classes(codes),
        }
    }
}

/// Fixed 2-fold wrapper-fitness setup for one run: the folds, the learner and the objectives.
#[derive(Debug, Clone)]
pub struct FitnessContext {
    model: ModelSpec,
    objectives: Vec<Objective>,
    folds: [(Vec<usize>, CodedTarget); 2],
}

impl FitnessContext {
    /// Shuffles the training rows once and halves them: `perm[..n/2]` and `perm[n/2..]`.
    pub fn new<R: Rng + ?Sized>(
        train: &Dataset,
        model: ModelSpec,
        objectives: Vec<Objective>,
        rng: &mut R,
    ) -> Result<FitnessContext, GpError> {
        let mut perm: Vec<usize> = (0..train.n_rows()).collect();
        perm.shuffle(rng);
        let b = perm.split_off(train.n_rows() / 2);
        FitnessContext::with_folds(train, model, objectives, perm, b)
    }

    pub fn with_folds(
        train: &Dataset,
        model: ModelSpec,
        objectives: Vec<Objective>,
        fold_a: Vec<usize>,
        fold_b: Vec<usize>,
    ) -> Result<FitnessContext, GpError> {
        if fold_a.is_empty() || fold_b.is_empty() {
            return Err(GpError::DegenerateFold(format!(
                "{} training rows cannot be halved into two non-empty folds",
                train.n_rows()
            )));
        }
        let (all, _) = CodedTarget::of(train.target());
        let fa = all.select(&fold_a);
        let fb = all.select(&fold_b);
        if model.kind == ModelKind::Ridge {
            for (name, f) in [("first", &fa), ("second", &fb)] {
                if let CodedTarget::Classes { codes, .. } = f {
                    if codes.iter().all(|&c| c == codes[0]) {
                        return Err(GpError::DegenerateFold(format!("{name} half holds a single class")));
                    }
                }
            }
        }
        Ok(FitnessContext { model, objectives, folds: [(fold_a, fa), (fold_b, fb)] })
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn folds(&self) -> (&[usize], &[usize]) {
        (&self.folds[0].0, &self.folds[1].0)
    }

    fn worst(&self, size: usize) -> FitnessVector {
        FitnessVector {
            objectives: self
                .objectives
                .iter()
                .map(|o| match o {
                    Objective::Metric(m) => (m.worst(), o.direction()),
                    Objective::Size => (size as f64, o.direction()),
                })
                .collect(),
            tiebreak_size: size,
        }
    }

    /// See [`evaluate_fitness`]. `generation` only labels errors.
    pub fn evaluate(&self, ind: &Individual, train: &Dataset, generation: usize) -> Result<FitnessVector, GpError> {
        let size = ind.size();
        let cols = ind
            .trees
            .iter()
            .map(|t| eval_column(t, train))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| GpError::Eval { generation, source })?;

        let mut sums = vec![0.0; self.objectives.len()];
        for k in 0..2 {
            let (fit_rows, fit_target) = &self.folds[k];
            let (score_rows, score_target) = &self.folds[1 - k];
            let x_fit: Vec<Vec<f64>> = cols.iter().map(|c| fit_rows.iter().map(|&r| c[r]).collect()).collect();
            let x_score: Vec<Vec<f64>> = cols.iter().map(|c| score_rows.iter().map(|&r| c[r]).collect()).collect();
            let model = match self.model.fit(&x_fit, &fit_target.as_ref()) {
                Ok(m) => m,
                // numerically unusable transformations are poor individuals, not run failures
                Err(ModelError::NonFinite | ModelError::Numerical(_)) => return Ok(self.worst(size)),
                Err(source) => return Err(GpError::Model { generation, source }),
            };
            let pred = model.predict(&x_score).map_err(|source| GpError::Model { generation, source })?;
            for (s, o) in sums.iter_mut().zip(&self.objectives) {
                if let Objective::Metric(m) = o {
                    *s += score(*m, score_target.truth(), &pred);
                }
            }
        }
        let objectives = self
            .objectives
            .iter()
            .zip(sums)
            .map(|(o, s)| match o {
                Objective::Metric(_) => (s / 2.0, o.direction()),
                Objective::Size => (size as f64, o.direction()),
            })
            .collect();
        Ok(FitnessVector { objectives, tiebreak_size: size })
    }
}

/// 2-fold wrapper fitness: fit on one half of the transformed training data,
/// score on the other, both ways, and average. Size objectives are the node count.
pub fn evaluate_fitness(ind: &Individual, train: &Dataset, ctx: &FitnessContext) -> Result<FitnessVector, GpError> {
    ctx.evaluate(ind, train, 0)
}

/// Fits `model` on the individual's transformation of the whole training set
/// and scores it on the transformed test set. Returns the score and the
/// fitted model's parameter count.
pub fn test_score(
    ind: &Individual,
    train: &Dataset,
    test: &Dataset,
    model: &ModelSpec,
    metric: Metric,
) -> Result<(f64, usize), GpError> {
    let eval = |d: &Dataset| {
        ind.trees
            .iter()
            .map(|t| eval_column(t, d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| GpError::Eval { generation: 0, source })
    };
    let (x_train, x_test) = (eval(train)?, eval(test)?);
    let (y_train, coder) = CodedTarget::of(train.target());
    let y_test = match (test.target(), &coder) {
        (Target::Labels(l), Some(c)) => CodedTarget::Classes { codes: c.encode(l), n_classes: c.n_classes() },
        (t, _) => CodedTarget::of(t).0,
    };
    match model.fit(&x_train, &y_train.as_ref()) {
        Ok(m) => {
            let pred = m.predict(&x_test).map_err(|source| GpError::Model { generation: 0, source })?;
            Ok((score(metric, y_test.truth(), &pred), m.parameter_count()))
        }
        Err(ModelError::NonFinite | ModelError::Numerical(_)) => Ok((metric.worst(), 0)),
        Err(source) => Err(GpError::Model { generation: 0, source }),
    }
}
