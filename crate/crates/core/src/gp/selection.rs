use std::cmp::Ordering;

use rand::Rng;

use super::{FitnessVector, GpError, Individual};

/// Better on objective `obj`, then smaller size, then earlier index.
fn cmp_ranked(pop: &[Individual], i: usize, j: usize, obj: usize) -> Ordering {
    let (a, b) = (pop[i].fit(), pop[j].fit());
    a.cmp_on(b, obj).then(a.tiebreak_size.cmp(&b.tiebreak_size)).then(i.cmp(&j))
}

/// Index of the best of `candidates` on objective `obj`.
fn best_of(pop: &[Individual], candidates: impl IntoIterator<Item = usize>, obj: usize) -> usize {
    candidates.into_iter().min_by(|&i, &j| cmp_ranked(pop, i, j, obj)).expect("at least one candidate")
}

/// Best individual of the whole population on objective `obj`.
pub fn best_index(pop: &[Individual], obj: usize) -> usize {
    best_of(pop, 0..pop.len(), obj)
}

/// Best of `k` uniform draws (with replacement) on the first objective.
pub fn tournament<R: Rng + ?Sized>(pop: &[Individual], k: usize, rng: &mut R) -> usize {
    let draws: Vec<usize> = (0..k.max(1)).map(|_| rng.gen_range(0..pop.len())).collect();
    best_of(pop, draws, 0)
}

/// Two-stage selection: `k` independent `k`-tournaments on the first
/// objective produce `k` qualifiers; the qualifier best on the second
/// objective wins.
pub fn double_tournament<R: Rng + ?Sized>(pop: &[Individual], k: usize, rng: &mut R) -> usize {
    let qualifiers: Vec<usize> = (0..k.max(1)).map(|_| tournament(pop, k, rng)).collect();
    best_of(pop, qualifiers, 1)
}

/// `a` is no worse than `b` on every objective and strictly better on at least one.
pub fn dominates(a: &FitnessVector, b: &FitnessVector) -> bool {
    let mut strictly = false;
    for i in 0..a.objectives.len() {
        match a.cmp_on(b, i) {
            Ordering::Greater => return false,
            Ordering::Less => strictly = true,
            Ordering::Equal => {}
        }
    }
    strictly
}

/// Fast non-dominated sorting. Each front lists population indices in ascending order.
pub fn pareto_fronts(fits: &[&FitnessVector]) -> Result<Vec<Vec<usize>>, GpError> {
    let Some(first) = fits.first() else {
        return Ok(Vec::new());
    };
    let arity = first.objectives.len();
    if fits.iter().any(|f| f.objectives.len() != arity) {
        return Err(GpError::MixedArity);
    }
    let n = fits.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(fits[i], fits[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(fits[j], fits[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}
