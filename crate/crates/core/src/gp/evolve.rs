use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::*;
use super::selection::{best_index, double_tournament, pareto_fronts, tournament};
use super::{init_population, schema_of, test_score, FitnessContext, GpConfig, GpError, GpMode, Individual};
use crate::data::{Dataset, TaskKind};
use crate::models::Metric;

/// Per-generation statistics of the generation's best individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_objectives: Vec<f64>,
    /// Held-out score of the best individual (model refitted on the whole training set).
    pub test_metric: Option<f64>,
    pub size: usize,
    pub dimensionality: usize,
    /// Milliseconds since the run started.
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<GenerationRecord>,
}

impl RunLog {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("records serialize"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(text: &str) -> Result<RunLog, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RunLog { records })
    }

    /// Copy with wall-clock fields zeroed, for comparing runs.
    pub fn without_timing(&self) -> RunLog {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.wall_ms = 0;
        }
        r
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub best: Individual,
    pub log: RunLog,
    /// Score on the test set, when one was supplied.
    pub test_score: Option<f64>,
    /// Parameter count of the wrapped model fitted on the whole training set.
    pub model_parameters: Option<usize>,
}

/// What an observer sees after each generation is evaluated.
pub struct GenerationView<'a> {
    pub generation: usize,
    pub population: &'a [Individual],
    /// Number of leading individuals copied unchanged from the previous generation.
    pub n_elites: usize,
}

/// Runs the generational loop on `train`; `test`, when given, is only scored, never selected on.
pub fn evolve(cfg: &GpConfig, train: &Dataset, test: Option<&Dataset>) -> Result<EvolveOutcome, GpError> {
    evolve_observed(cfg, train, test, &mut |_| {})
}

/// [`evolve`] with a callback after each generation's evaluation.
pub fn evolve_observed(
    cfg: &GpConfig,
    train: &Dataset,
    test: Option<&Dataset>,
    observer: &mut dyn FnMut(&GenerationView),
) -> Result<EvolveOutcome, GpError> {
    cfg.validate()?;
    let started = Instant::now();
    let classification = train.task() == TaskKind::Classification;
    let primary = if classification { Metric::Waf } else { Metric::Rmse };
    let schema = schema_of(train);
    if schema.is_empty() {
        return Err(GpError::EmptySchema);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ctx = FitnessContext::new(train, cfg.model, cfg.objectives(classification), &mut rng)?;
    let mut pop = init_population(cfg, &schema, &mut rng)?;
    let mut log = RunLog::default();
    let mut n_elites = 0;

    for generation in 0..=cfg.generations {
        evaluate_all(&mut pop, train, &ctx, generation)?;
        observer(&GenerationView { generation, population: &pop, n_elites });

        let best = &pop[run_best(cfg.mode, &pop)?];
        let test_metric = match test {
            Some(t) => Some(test_score(best, train, t, &cfg.model, primary).map_err(|e| at(e, generation))?.0),
            None => None,
        };
        log.records.push(GenerationRecord {
            generation,
            best_objectives: best.fit().objectives.iter().map(|o| o.0).collect(),
            test_metric,
            size: best.size(),
            dimensionality: best.dimensionality(),
            wall_ms: started.elapsed().as_millis() as u64,
        });
        if generation == cfg.generations {
            break;
        }

        let mut next = elites(cfg, &pop)?;
        n_elites = next.len();
        while next.len() < cfg.population_size {
            let select = |rng: &mut ChaCha8Rng| match cfg.mode {
                GpMode::M3gp => tournament(&pop, cfg.tournament_size, rng),
                GpMode::M6gp => double_tournament(&pop, cfg.tournament_size, rng),
            };
            let op = cfg.operators.draw(&mut rng);
            let p1 = &pop[select(&mut rng)];
            match op {
                Operator::SwapSubtree | Operator::SwapTree => {
                    let p2 = &pop[select(&mut rng)];
                    let (c1, c2) = if op == Operator::SwapSubtree {
                        crossover_swap_subtree(p1, p2, cfg.depth_limit, &mut rng)
                    } else {
                        crossover_swap_tree(p1, p2, &mut rng)
                    };
                    next.push(c1);
                    if next.len() < cfg.population_size {
                        next.push(c2);
                    }
                }
                Operator::SubtreeMutation => {
                    next.push(mutate_subtree(p1, &schema, cfg.init_depth, cfg.depth_limit, &mut rng))
                }
                Operator::AddTree => next.push(mutate_add_tree(p1, &schema, cfg.init_depth, &mut rng)),
                Operator::RemoveTree => next.push(mutate_remove_tree(p1, &mut rng)),
            }
        }
        pop = next;
    }

    let best = pop[run_best(cfg.mode, &pop)?].clone();
    let (test_score, model_parameters) = match test {
        Some(t) => {
            let (s, p) = test_score(&best, train, t, &cfg.model, primary).map_err(|e| at(e, cfg.generations))?;
            (Some(s), Some(p))
        }
        None => (None, None),
    };
    Ok(EvolveOutcome { best, log, test_score, model_parameters })
}

fn at(e: GpError, generation: usize) -> GpError {
    match e {
        GpError::Eval { source, .. } => GpError::Eval { generation, source },
        GpError::Model { source, .. } => GpError::Model { generation, source },
        other => other,
    }
}

/// Evaluates every unevaluated individual in parallel. Evaluation draws no
/// randomness, so results do not depend on scheduling.
fn evaluate_all(pop: &mut [Individual], train: &Dataset, ctx: &FitnessContext, generation: usize) -> Result<(), GpError> {
    let fits = pop
        .par_iter()
        .map(|ind| match ind.fitness {
            Some(_) => Ok(None),
            None => ctx.evaluate(ind, train, generation).map(Some),
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (ind, f) in pop.iter_mut().zip(fits) {
        if f.is_some() {
            ind.fitness = f;
        }
    }
    Ok(())
}

/// M3GP: best on the single objective. M6GP: the first-front member best on
/// the first objective. Ties go to the smaller individual, then the earlier one.
fn run_best(mode: GpMode, pop: &[Individual]) -> Result<usize, GpError> {
    match mode {
        GpMode::M3gp => Ok(best_index(pop, 0)),
        GpMode::M6gp => {
            let fits: Vec<_> = pop.iter().map(Individual::fit).collect();
            let front = pareto_fronts(&fits)?.swap_remove(0);
            Ok(front
                .into_iter()
                .min_by(|&i, &j| {
                    fits[i].cmp_on(fits[j], 0).then(fits[i].tiebreak_size.cmp(&fits[j].tiebreak_size)).then(i.cmp(&j))
                })
                .expect("first front is never empty"))
        }
    }
}

/// Individuals copied unchanged (fitness included) into the next generation.
fn elites(cfg: &GpConfig, pop: &[Individual]) -> Result<Vec<Individual>, GpError> {
    match cfg.mode {
        GpMode::M3gp => Ok(vec![pop[best_index(pop, 0)].clone()]),
        GpMode::M6gp => {
            let fits: Vec<_> = pop.iter().map(Individual::fit).collect();
            let mut front = pareto_fronts(&fits)?.swap_remove(0);
            if front.len() > cfg.population_size {
                front.sort_by_key(|&i| (pop[i].size(), i));
                front.truncate(cfg.population_size);
                front.sort_unstable();
            }
            Ok(front.into_iter().map(|i| pop[i].clone()).collect())
        }
    }
}
