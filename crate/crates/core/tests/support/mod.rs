//! Independent oracles and randomized invariant checks. Each check returns a
//! one-line summary on success and a description of the first violation
//! otherwise, so the same code backs the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::sync::Arc;

use featurecraft_core::data::{Dataset, Target};
use featurecraft_core::exprlang::{eval_column, parse, BinaryOp, ExprTree, UnaryOp};
use featurecraft_core::gp::{
    evolve_observed, pareto_fronts, Direction, FitnessVector, GpConfig, GpMode, Individual,
};
use featurecraft_core::metrics::mann_whitney_u;
use featurecraft_core::models::{dt_fit, normal_equation_residual, ridge_fit, TargetRef};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

// ---------------------------------------------------------------- exprlang

const NAMES: [&str; 6] = ["x", "y_2", "fly ash", "Jitter:RAP", "say \"hi\"", "a\\b"];

/// Grow-method tree over the full operator set, depth 1..=max_depth.
pub fn random_tree(rng: &mut impl Rng, max_depth: usize, names: &[&str]) -> ExprTree {
    if max_depth <= 1 || rng.gen_bool(0.25) {
        return ExprTree::feature(*names.choose(rng).unwrap());
    }
    match rng.gen_range(0..3) {
        0 => {
            let op = *[UnaryOp::LogS, UnaryOp::SqrtS, UnaryOp::Pow2, UnaryOp::Pow3].choose(rng).unwrap();
            ExprTree::unary(op, random_tree(rng, max_depth - 1, names))
        }
        _ => {
            let op = *[BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::PDiv].choose(rng).unwrap();
            ExprTree::binary(op, random_tree(rng, max_depth - 1, names), random_tree(rng, max_depth - 1, names))
        }
    }
}

pub fn check_round_trip(trees: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..trees {
        let t = random_tree(&mut rng, 1 + i % 9, &NAMES);
        let text = t.to_text();
        match parse(&text) {
            Ok(back) if back == t => {}
            Ok(back) => return Err(format!("tree {i}: '{text}' reparsed as '{}'", back.to_text())),
            Err(e) => return Err(format!("tree {i}: '{text}' failed to parse: {e}")),
        }
    }
    Ok(format!("{trees} random trees survive print/parse"))
}

/// Columns mixing zeros, signs, tiny and huge magnitudes.
pub fn adversarial_dataset() -> Dataset {
    let base = [0.0, -0.0, 1.0, -1.0, 1e-12, -1e-12, 1e-300, 1e300, -1e300, f64::MAX, -f64::MAX, 0.5, -7.25, 1e-9];
    let n = base.len();
    let cols: Vec<Vec<f64>> = (0..NAMES.len()).map(|k| (0..n).map(|i| base[(i + 3 * k) % n]).collect()).collect();
    Dataset::new("adversarial", NAMES.iter().map(|s| s.to_string()).collect(), cols, Target::Numeric(vec![0.0; n]))
        .expect("valid dataset")
}

pub fn check_eval_totality(trees: usize, seed: u64) -> Check {
    let data = adversarial_dataset();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..trees {
        let t = random_tree(&mut rng, 2 + i % 10, &NAMES);
        let v = eval_column(&t, &data).map_err(|e| format!("'{}': {e}", t.to_text()))?;
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(format!("'{}' produced {bad}", t.to_text()));
        }
    }
    Ok(format!("{trees} random trees finite on zero/negative/extreme columns"))
}

// ---------------------------------------------------------------- pareto

fn no_worse(a: f64, b: f64, d: Direction) -> bool {
    match d {
        Direction::Minimize => a <= b,
        Direction::Maximize => a >= b,
    }
}

/// Direct definition of dominance on raw values.
pub fn brute_dominates(a: &FitnessVector, b: &FitnessVector) -> bool {
    let pairs = a.objectives.iter().zip(&b.objectives);
    pairs.clone().all(|(x, y)| no_worse(x.0, y.0, x.1)) && pairs.clone().any(|(x, y)| x.0 != y.0)
}

/// Peels fronts by repeatedly taking the members nobody remaining dominates. O(n²) per front.
pub fn brute_fronts(fits: &[FitnessVector]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..fits.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| brute_dominates(&fits[j], &fits[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

pub fn random_fitness(rng: &mut impl Rng, maximize_first: bool) -> FitnessVector {
    // a coarse grid makes ties and duplicates common
    let d0 = if maximize_first { Direction::Maximize } else { Direction::Minimize };
    let (a, b) = (rng.gen_range(0..12) as f64 / 4.0, rng.gen_range(0..12) as f64 / 4.0);
    FitnessVector { objectives: vec![(a, d0), (b, Direction::Minimize)], tiebreak_size: 1 }
}

pub fn check_pareto(populations: usize, max_size: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in 0..populations {
        let n = rng.gen_range(1..=max_size);
        let maximize_first = rng.gen_bool(0.5);
        let fits: Vec<FitnessVector> = (0..n).map(|_| random_fitness(&mut rng, maximize_first)).collect();
        let refs: Vec<&FitnessVector> = fits.iter().collect();
        let got = pareto_fronts(&refs).map_err(|e| format!("population {p}: {e}"))?;
        let want = brute_fronts(&fits);
        if got != want {
            return Err(format!("population {p} (n={n}): fronts {got:?} != brute force {want:?}"));
        }
    }
    Ok(format!("{populations} populations (size <= {max_size}) match brute-force fronts"))
}

// ---------------------------------------------------------------- gp runs

pub fn toy_regression(seed: u64, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = (0..n).map(|i| a[i] * b[i] + c[i] / b[i] + 0.05 * rng.gen_range(-1.0..1.0)).collect();
    Dataset::new("toy", vec!["a".into(), "b".into(), "c".into()], vec![a, b, c], Target::Numeric(y)).unwrap()
}

/// Toy M3GP runs watched every generation: the best RMSE never gets worse,
/// the elite is last generation's best, and every individual respects the
/// depth limit with at least one tree.
pub fn check_m3gp_runs(runs: usize, generations: usize, seed: u64) -> Check {
    let mut checked = 0usize;
    for run in 0..runs as u64 {
        let data = toy_regression(seed + run, 60);
        let cfg = GpConfig {
            mode: GpMode::M3gp,
            population_size: 40,
            generations,
            seed: seed + run,
            ..GpConfig::default()
        };
        let mut violation: Option<String> = None;
        let mut prev_best: Option<(f64, Individual)> = None;
        let mut observer = |v: &featurecraft_core::gp::GenerationView| {
            if violation.is_some() {
                return;
            }
            for ind in v.population {
                checked += 1;
                if ind.dimensionality() < 1 {
                    violation = Some(format!("run {run} gen {}: empty individual", v.generation));
                    return;
                }
                if let Some(t) = ind.trees.iter().find(|t| t.depth() > cfg.depth_limit) {
                    violation = Some(format!("run {run} gen {}: tree depth {}", v.generation, t.depth()));
                    return;
                }
            }
            let best = v
                .population
                .iter()
                .map(|i| i.fit().value(0))
                .fold(f64::INFINITY, f64::min);
            if let Some((pb, elite)) = &prev_best {
                if best > *pb {
                    violation = Some(format!("run {run} gen {}: best rmse rose {pb} -> {best}", v.generation));
                    return;
                }
                if v.n_elites != 1 || v.population[0].trees != elite.trees {
                    violation = Some(format!("run {run} gen {}: elite not carried over", v.generation));
                    return;
                }
            }
            let idx = featurecraft_core::gp::best_index(v.population, 0);
            prev_best = Some((best, v.population[idx].clone()));
        };
        evolve_observed(&cfg, &data, None, &mut observer).map_err(|e| format!("run {run}: {e}"))?;
        if let Some(v) = violation {
            return Err(v);
        }
    }
    Ok(format!("{runs} runs x {generations} generations, {checked} individuals checked"))
}

/// M6GP: the carried-over elites are exactly last generation's first front
/// and are mutually non-dominated.
pub fn check_m6gp_elites(runs: usize, generations: usize, seed: u64) -> Check {
    for run in 0..runs as u64 {
        let data = toy_regression(seed + run, 50);
        let cfg = GpConfig { mode: GpMode::M6gp, population_size: 30, generations, seed: seed + run, ..GpConfig::default() };
        let mut violation: Option<String> = None;
        let mut prev_front: Option<Vec<Vec<ExprTree>>> = None;
        let mut observer = |v: &featurecraft_core::gp::GenerationView| {
            if violation.is_some() {
                return;
            }
            let fits: Vec<FitnessVector> = v.population.iter().map(|i| i.fit().clone()).collect();
            if let Some(front) = &prev_front {
                let elites: Vec<Vec<ExprTree>> = v.population[..v.n_elites].iter().map(|i| i.trees.clone()).collect();
                if &elites != front {
                    violation = Some(format!("run {run} gen {}: elites differ from previous front", v.generation));
                }
                for i in 0..v.n_elites {
                    for j in 0..v.n_elites {
                        if brute_dominates(&fits[j], &fits[i]) {
                            violation = Some(format!("run {run} gen {}: elite {i} dominated by {j}", v.generation));
                        }
                    }
                }
            }
            let front = &brute_fronts(&fits)[0];
            prev_front = Some(front.iter().map(|&i| v.population[i].trees.clone()).collect());
        };
        evolve_observed(&cfg, &data, None, &mut observer).map_err(|e| format!("run {run}: {e}"))?;
        if let Some(v) = violation {
            return Err(v);
        }
    }
    Ok(format!("{runs} M6GP runs keep exactly the non-dominated front"))
}

// ---------------------------------------------------------------- trees

#[derive(Debug)]
enum OracleNode {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: Box<OracleNode>, right: Box<OracleNode> },
}

impl OracleNode {
    fn predict(&self, x: &[Vec<f64>], row: usize) -> f64 {
        match self {
            OracleNode::Leaf(v) => *v,
            OracleNode::Split { feature, threshold, left, right } => {
                if x[*feature][row] <= *threshold {
                    left.predict(x, row)
                } else {
                    right.predict(x, row)
                }
            }
        }
    }
}

fn sse(y: &[f64], rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let m = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
    rows.iter().map(|&r| (y[r] - m).powi(2)).sum()
}

fn gini_weighted(codes: &[usize], k: usize, rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let mut counts = vec![0.0; k];
    for &r in rows {
        counts[codes[r]] += 1.0;
    }
    let n = rows.len() as f64;
    n - counts.iter().map(|c| c * c).sum::<f64>() / n
}

/// Exhaustive CART: try every feature and every midpoint between distinct
/// sorted values, recomputing impurity from scratch for each candidate.
fn oracle_tree(x: &[Vec<f64>], t: &TargetRef, rows: &[usize], depth_left: usize) -> OracleNode {
    let impurity = |rows: &[usize]| match t {
        TargetRef::Numeric(y) => sse(y, rows),
        TargetRef::Classes { codes, n_classes } => gini_weighted(codes, *n_classes, rows),
    };
    let leaf = || match t {
        TargetRef::Numeric(y) => OracleNode::Leaf(rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64),
        TargetRef::Classes { codes, n_classes } => {
            let mut counts = vec![0usize; *n_classes];
            for &r in rows {
                counts[codes[r]] += 1;
            }
            let best = (0..*n_classes).fold(0, |b, k| if counts[k] > counts[b] { k } else { b });
            OracleNode::Leaf(best as f64)
        }
    };
    let parent = impurity(rows);
    if depth_left == 0 || rows.len() < 2 || parent <= 0.0 {
        return leaf();
    }
    let mut candidates = Vec::new();
    for (f, col) in x.iter().enumerate() {
        let mut vals: Vec<f64> = rows.iter().map(|&r| col[r]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = w[0] + (w[1] - w[0]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| col[i] <= thr);
            candidates.push((f, thr, parent - impurity(&l) - impurity(&r), l, r));
        }
    }
    let tol = 1e-10 * parent.max(1.0);
    let Some(max_gain) = candidates.iter().map(|c| c.2).reduce(f64::max) else { return leaf() };
    if max_gain <= tol {
        return leaf();
    }
    // first candidate (feature order, then ascending threshold) within tolerance of the best
    let (f, thr, _, l, r) = candidates.into_iter().find(|c| c.2 >= max_gain - tol).unwrap();
    OracleNode::Split {
        feature: f,
        threshold: thr,
        left: Box::new(oracle_tree(x, t, &l, depth_left - 1)),
        right: Box::new(oracle_tree(x, t, &r, depth_left - 1)),
    }
}

pub fn check_dt_oracle(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for inst in 0..instances {
        let n = rng.gen_range(2..=12);
        let p = rng.gen_range(1..=3);
        let depth = rng.gen_range(0..=4);
        // integer-valued features so duplicate values and thresholds occur
        let x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.gen_range(0..6) as f64).collect()).collect();
        let classification = inst % 2 == 1;
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let codes: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let t = if classification {
            TargetRef::Classes { codes: &codes, n_classes: 3 }
        } else {
            TargetRef::Numeric(&y)
        };
        let rows: Vec<usize> = (0..n).collect();
        let oracle = oracle_tree(&x, &t, &rows, depth);
        let fitted = dt_fit(&x, &t, depth).map_err(|e| format!("instance {inst}: {e}"))?;
        // probe every row plus points between and beyond observed values
        let probes: Vec<Vec<f64>> = x
            .iter()
            .map(|c| c.iter().copied().chain((0..13).map(|k| k as f64 / 2.0 - 0.5)).collect())
            .collect();
        for r in 0..probes[0].len() {
            let (a, b) = (fitted.predict_row(&probes, r), oracle.predict(&probes, r));
            if (a - b).abs() > 1e-9 * (1.0 + b.abs()) {
                return Err(format!("instance {inst} (n={n}, p={p}, depth={depth}): probe {r} gives {a}, oracle {b}"));
            }
        }
    }
    Ok(format!("{instances} random instances (<= 12 x 3) match the exhaustive-split oracle"))
}

// ---------------------------------------------------------------- ridge

fn random_system(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let n = rng.gen_range(5..60);
    let p = rng.gen_range(1..8);
    let scale: Vec<f64> = (0..p).map(|_| 10f64.powf(rng.gen_range(-1.0..2.0))).collect();
    let x: Vec<Vec<f64>> = scale.iter().map(|s| (0..n).map(|_| s * rng.gen_range(-1.0..1.0)).collect()).collect();
    let y = (0..n).map(|i| x.iter().map(|c| c[i]).sum::<f64>() + rng.gen_range(-1.0..1.0)).collect();
    (x, y, 10f64.powf(rng.gen_range(-2.0..1.0)))
}

pub fn check_ridge_residual(systems: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for s in 0..systems {
        let (x, y, lambda) = random_system(&mut rng);
        let m = ridge_fit(&x, &y, lambda).map_err(|e| format!("system {s}: {e}"))?;
        let r = normal_equation_residual(&x, &y, lambda, &m.weights[0]);
        worst = worst.max(r);
        if r > 1e-8 {
            return Err(format!("system {s}: relative residual {r:e}"));
        }
    }
    Ok(format!("{systems} random systems, worst relative residual {worst:.1e}"))
}

/// Cyclic coordinate descent on the centered ridge objective.
pub fn ridge_by_descent(x: &[Vec<f64>], y: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let n = y.len() as f64;
    let xm: Vec<f64> = x.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let ym = y.iter().sum::<f64>() / n;
    let xc: Vec<Vec<f64>> = x.iter().zip(&xm).map(|(c, m)| c.iter().map(|v| v - m).collect()).collect();
    let mut resid: Vec<f64> = y.iter().map(|v| v - ym).collect();
    let norms: Vec<f64> = xc.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() + lambda).collect();
    let mut w = vec![0.0; x.len()];
    for _ in 0..200_000 {
        let mut delta = 0.0f64;
        for j in 0..w.len() {
            let rho: f64 = xc[j].iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() + (norms[j] - lambda) * w[j];
            let new = rho / norms[j];
            let d = new - w[j];
            if d != 0.0 {
                for (r, a) in resid.iter_mut().zip(&xc[j]) {
                    *r -= d * a;
                }
                w[j] = new;
            }
            delta = delta.max(d.abs() / (1.0 + new.abs()));
        }
        if delta < 1e-15 {
            break;
        }
    }
    let b = ym - w.iter().zip(&xm).map(|(a, m)| a * m).sum::<f64>();
    (w, b)
}

pub fn check_ridge_descent(systems: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..systems {
        let (x, y, _) = random_system(&mut rng);
        let lambda = rng.gen_range(0.5..5.0);
        let m = ridge_fit(&x, &y, lambda).map_err(|e| format!("system {s}: {e}"))?;
        let (w, b) = ridge_by_descent(&x, &y, lambda);
        let diffs = m.weights[0].iter().zip(&w).map(|(a, c)| (a - c).abs()).chain([(m.intercepts[0] - b).abs()]);
        let worst = diffs.fold(0.0, f64::max);
        if worst > 1e-6 {
            return Err(format!("system {s}: closed form and descent differ by {worst:e}"));
        }
    }
    Ok(format!("{systems} random systems agree with coordinate descent to 1e-6"))
}

// ---------------------------------------------------------------- mann-whitney

fn midranks(pooled: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && pooled[idx[j + 1]] == pooled[idx[i]] {
            j += 1;
        }
        for k in i..=j {
            ranks[idx[k]] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided exact p-value by enumerating every assignment of the pooled
/// sample to the first group.
pub fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let (n1, n) = (a.len(), pooled.len());
    let u_of = |sum: f64| sum - (n1 * (n1 + 1)) as f64 / 2.0;
    let center = (n1 * (n - n1)) as f64 / 2.0;
    let observed = (u_of(ranks[..n1].iter().sum()) - center).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        total += 1;
        let sum: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (u_of(sum) - center).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

pub fn check_mwu_permutation(cases: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for c in 0..cases {
        let (n1, n2) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let shift = rng.gen_range(0..4) as f64;
        let a: Vec<f64> = (0..n1).map(|_| rng.gen_range(0..8) as f64 + shift).collect();
        let b: Vec<f64> = (0..n2).map(|_| rng.gen_range(0..8) as f64).collect();
        let got = mann_whitney_u(&a, &b).map_err(|e| format!("case {c}: {e}"))?.p;
        let want = permutation_p(&a, &b);
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 0.01 {
            return Err(format!("case {c}: a={a:?} b={b:?}: p={got}, permutation p={want}"));
        }
    }
    Ok(format!("{cases} cases (n <= 8, with ties) within 0.01 of enumeration, worst gap {worst:.1e}"))
}

pub fn schema(names: &[&str]) -> Vec<Arc<str>> {
    names.iter().map(|s| Arc::from(*s)).collect()
}
