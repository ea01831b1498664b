use rand::seq::index::sample;
use rand::Rng;

use super::{check_columns, ModelError, TargetRef};

/// Node of a fitted CART tree. Rows with `x[feature] <= threshold` go left.
///
/// Classification leaves hold the class code as an `f64` (codes are small
/// integers, so the cast is exact).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Greedy CART tree. `depth` counts split levels: a single leaf has depth 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub classification: bool,
}

/// A chosen split and the impurity decrease it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Relative slack under which two gains count as tied (so ties resolve by
/// feature index and threshold order instead of rounding noise).
const GAIN_TOLERANCE: f64 = 1e-10;

impl DecisionTree {
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    /// One parameter per leaf value.
    pub fn parameter_count(&self) -> usize {
        self.n_leaves()
    }

    pub fn predict_row(&self, x: &[Vec<f64>], row: usize) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature][row] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.n_features {
            return Err(ModelError::FeatureMismatch { expected: self.n_features, found: x.len() });
        }
        let n = x.first().map_or(0, Vec::len);
        Ok((0..n).map(|r| self.predict_row(x, r)).collect())
    }
}

/// Weighted impurity (n × impurity) of a sample set.
#[derive(Clone)]
enum Stats {
    Variance { n: f64, sum: f64, sumsq: f64 },
    Gini { n: f64, counts: Vec<f64> },
}

impl Stats {
    fn empty(target: &TargetRef) -> Stats {
        match target {
            TargetRef::Numeric(_) => Stats::Variance { n: 0.0, sum: 0.0, sumsq: 0.0 },
            TargetRef::Classes { n_classes, .. } => Stats::Gini { n: 0.0, counts: vec![0.0; *n_classes] },
        }
    }

    fn add(&mut self, target: &TargetRef, row: usize, sign: f64) {
        match (self, target) {
            (Stats::Variance { n, sum, sumsq }, TargetRef::Numeric(y)) => {
                *n += sign;
                *sum += sign * y[row];
                *sumsq += sign * y[row] * y[row];
            }
            (Stats::Gini { n, counts }, TargetRef::Classes { codes, .. }) => {
                *n += sign;
                counts[codes[row]] += sign;
            }
            _ => unreachable!("stats kind always matches the target kind"),
        }
    }

    fn weighted_impurity(&self) -> f64 {
        match self {
            Stats::Variance { n, sum, sumsq } if *n > 0.0 => (sumsq - sum * sum / n).max(0.0),
            Stats::Gini { n, counts } if *n > 0.0 => n - counts.iter().map(|c| c * c).sum::<f64>() / n,
            _ => 0.0,
        }
    }
}

fn leaf_value(target: &TargetRef, rows: &[usize]) -> f64 {
    match target {
        TargetRef::Numeric(y) => rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64,
        TargetRef::Classes { codes, n_classes } => {
            let mut counts = vec![0usize; *n_classes];
            for &r in rows {
                counts[codes[r]] += 1;
            }
            let mut best = 0;
            for (k, &c) in counts.iter().enumerate() {
                if c > counts[best] {
                    best = k;
                }
            }
            best as f64
        }
    }
}

fn is_pure(target: &TargetRef, rows: &[usize]) -> bool {
    match target {
        TargetRef::Numeric(y) => rows.iter().all(|&r| y[r] == y[rows[0]]),
        TargetRef::Classes { codes, .. } => rows.iter().all(|&r| codes[r] == codes[rows[0]]),
    }
}

/// Best split over `features` (visited in the given order) for the sample set
/// `rows`; `None` when no split strictly lowers impurity.
pub fn best_split(x: &[Vec<f64>], target: &TargetRef, rows: &[usize], features: &[usize]) -> Option<SplitChoice> {
    let mut parent = Stats::empty(target);
    for &r in rows {
        parent.add(target, r, 1.0);
    }
    let parent_imp = parent.weighted_impurity();
    let tol = GAIN_TOLERANCE * parent_imp.max(1.0);
    let mut best: Option<SplitChoice> = None;
    let mut order = rows.to_vec();
    for &f in features {
        let col = &x[f];
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let mut left = Stats::empty(target);
        let mut right = parent.clone();
        for i in 0..order.len() - 1 {
            left.add(target, order[i], 1.0);
            right.add(target, order[i], -1.0);
            let (lo, hi) = (col[order[i]], col[order[i + 1]]);
            if lo == hi {
                continue;
            }
            let gain = parent_imp - left.weighted_impurity() - right.weighted_impurity();
            if gain > tol && best.is_none_or(|b| gain > b.gain + tol) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(SplitChoice { feature: f, threshold, gain });
            }
        }
    }
    best
}

/// Fits a tree on the (possibly repeated) sample indices `rows`.
///
/// `max_features` enables per-split feature subsampling without replacement
/// (the random-forest variant); `None` considers every feature.
pub fn fit_rows<R: Rng + ?Sized>(
    x: &[Vec<f64>],
    target: &TargetRef,
    rows: Vec<usize>,
    max_depth: usize,
    max_features: Option<usize>,
    rng: &mut R,
) -> DecisionTree {
    let p = x.len();
    let mut nodes = Vec::new();
    // explicit stack of (node slot, rows, depth)
    nodes.push(Node::Leaf(0.0));
    let mut stack = vec![(0usize, rows, 0usize)];
    while let Some((slot, rows, depth)) = stack.pop() {
        let split = if depth >= max_depth || rows.len() < 2 || is_pure(target, &rows) {
            None
        } else {
            let features: Vec<usize> = match max_features {
                Some(k) if k < p => {
                    let mut f = sample(rng, p, k).into_vec();
                    f.sort_unstable();
                    f
                }
                _ => (0..p).collect(),
            };
            best_split(x, target, &rows, &features)
        };
        match split {
            None => nodes[slot] = Node::Leaf(leaf_value(target, &rows)),
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[s.feature][i] <= s.threshold);
                let (li, ri) = (nodes.len(), nodes.len() + 1);
                nodes.push(Node::Leaf(0.0));
                nodes.push(Node::Leaf(0.0));
                nodes[slot] = Node::Split { feature: s.feature, threshold: s.threshold, left: li, right: ri };
                stack.push((ri, r, depth + 1));
                stack.push((li, l, depth + 1));
            }
        }
    }
    DecisionTree { nodes, n_features: p, classification: matches!(target, TargetRef::Classes { .. }) }
}

/// CART on all rows and all features.
pub fn dt_fit(x: &[Vec<f64>], target: &TargetRef, max_depth: usize) -> Result<DecisionTree, ModelError> {
    let n = target.len();
    check_columns(x, n)?;
    target.check()?;
    // deterministic: no feature subsampling, so the rng is never drawn from
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    Ok(fit_rows(x, target, (0..n).collect(), max_depth, None, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_is_a_leaf() {
        let x = vec![vec![1.0, 2.0, 3.0]];
        let t = dt_fit(&x, &TargetRef::Numeric(&[4.0, 4.0, 4.0]), 6).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf(4.0)]);
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(&x).unwrap(), vec![4.0; 3]);
    }

    #[test]
    fn step_function_splits_at_midpoint() {
        let x = vec![vec![1.0, 2.0, 3.0, 10.0, 11.0, 12.0]];
        let y = [0.0, 0.0, 0.0, 5.0, 5.0, 5.0];
        let t = dt_fit(&x, &TargetRef::Numeric(&y), 1).unwrap();
        assert_eq!(t.nodes[0], Node::Split { feature: 0, threshold: 6.5, left: 1, right: 2 });
        assert_eq!(t.predict(&x).unwrap(), y.to_vec());
    }

    #[test]
    fn depth_zero_is_the_mean() {
        let x = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let t = dt_fit(&x, &TargetRef::Numeric(&[1.0, 2.0, 3.0, 6.0]), 0).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf(3.0)]);
    }

    #[test]
    fn hand_routed_row() {
        let t = DecisionTree {
            nodes: vec![
                Node::Split { feature: 1, threshold: 0.5, left: 1, right: 2 },
                Node::Leaf(10.0),
                Node::Split { feature: 0, threshold: -1.0, left: 3, right: 4 },
                Node::Leaf(20.0),
                Node::Leaf(30.0),
            ],
            n_features: 2,
            classification: false,
        };
        // (x0=-2, x1=1): x1 > 0.5 -> right; x0 <= -1 -> leaf 20
        assert_eq!(t.predict(&[vec![-2.0, 0.0], vec![1.0, 0.5]]).unwrap(), vec![20.0, 10.0]);
        assert_eq!(t.predict(&[vec![1.0]]), Err(ModelError::FeatureMismatch { expected: 2, found: 1 }));
        assert_eq!(t.depth(), 2);
        assert_eq!(t.parameter_count(), 3);
    }

    #[test]
    fn gini_pure_fit_and_majority() {
        let x = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let codes = [1, 1, 0, 0];
        let t = dt_fit(&x, &TargetRef::Classes { codes: &codes, n_classes: 2 }, 6).unwrap();
        assert_eq!(t.predict(&x).unwrap(), vec![1.0, 1.0, 0.0, 0.0]);
        // 2-2 tie at a leaf goes to the smaller code
        let t = dt_fit(&x, &TargetRef::Classes { codes: &codes, n_classes: 2 }, 0).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf(0.0)]);
    }

    #[test]
    fn equal_gain_prefers_lower_feature_then_threshold() {
        // both features separate identically
        let x = vec![vec![0.0, 0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0, 1.0]];
        let t = dt_fit(&x, &TargetRef::Numeric(&[0.0, 0.0, 1.0, 1.0]), 1).unwrap();
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert_eq!(dt_fit(&[vec![f64::NAN]], &TargetRef::Numeric(&[1.0]), 3), Err(ModelError::NonFinite));
        assert_eq!(dt_fit(&[vec![]], &TargetRef::Numeric(&[]), 3), Err(ModelError::Empty));
    }
}
