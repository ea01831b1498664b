//! Error metrics, weighted F-score, rank-sum significance test and quartile summaries.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    Empty,
    LengthMismatch { left: usize, right: usize },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::Empty => write!(f, "metric needs at least one value"),
            MetricError::LengthMismatch { left, right } => write!(f, "length mismatch: {left} vs {right}"),
        }
    }
}

impl std::error::Error for MetricError {}

fn check<A, B>(a: &[A], b: &[B]) -> Result<(), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn rmse(y: &[f64], pred: &[f64]) -> Result<f64, MetricError> {
    check(y, pred)?;
    let sse: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

pub fn mae(y: &[f64], pred: &[f64]) -> Result<f64, MetricError> {
    check(y, pred)?;
    Ok(y.iter().zip(pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

pub fn max_abs_err(y: &[f64], pred: &[f64]) -> Result<f64, MetricError> {
    check(y, pred)?;
    Ok(y.iter().zip(pred).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Weighted average F1: per-class F1 weighted by the class's support in `y_true`.
///
/// Classes are the distinct labels of `y_true`; a class with zero precision
/// and recall contributes F1 = 0. Predicted labels absent from `y_true` only
/// lower the precision of the classes they were confused with.
pub fn waf<T: Eq + Hash>(y_true: &[T], y_pred: &[T]) -> Result<f64, MetricError> {
    check(y_true, y_pred)?;
    // label -> (support, predicted count, true positives)
    let mut counts: HashMap<&T, (usize, usize, usize)> = HashMap::new();
    for (t, p) in y_true.iter().zip(y_pred) {
        counts.entry(t).or_default().0 += 1;
        counts.entry(p).or_default().1 += 1;
        if t == p {
            counts.entry(t).or_default().2 += 1;
        }
    }
    let n = y_true.len() as f64;
    let mut total = 0.0;
    for &(support, predicted, tp) in counts.values() {
        if support == 0 {
            continue;
        }
        // F1 = 2PR/(P+R) = 2TP/(support + predicted)
        let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (support + predicted) as f64 };
        total += support as f64 / n * f1;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Samples this small on both sides are tested by exact enumeration instead
/// of the normal approximation.
pub const EXACT_MAX_SAMPLE: usize = 8;

/// Two-sided Mann–Whitney U test with midranks for ties.
///
/// When both samples have at most [`EXACT_MAX_SAMPLE`] values the p-value is
/// the exact permutation probability of a rank sum at least as extreme
/// (conditional on the observed ties). Otherwise it uses the normal
/// approximation with tie-corrected variance and a 0.5 continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::Empty);
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_sizes) = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    if tie_sizes.len() == 1 {
        return Ok(MannWhitney { u, p: 1.0 });
    }
    let p = if n1 <= EXACT_MAX_SAMPLE && n2 <= EXACT_MAX_SAMPLE {
        exact_p(&ranks, n1, r1)
    } else {
        normal_p(n1, n2, u, &tie_sizes)
    };
    Ok(MannWhitney { u, p: p.clamp(f64::MIN_POSITIVE, 1.0) })
}

/// 1-based midranks of `v` and the sizes of each group of equal values.
fn midranks(v: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && v[order[j]] == v[order[i]] {
            j += 1;
        }
        let mid = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mid;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

fn normal_p(n1: usize, n2: usize, u: f64, tie_sizes: &[usize]) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let n = n1f + n2f;
    let tie_term: f64 = tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term);
    let mu = n1f * n2f / 2.0;
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Enumerates every assignment of `n1` of the pooled ranks to the first sample.
fn exact_p(ranks: &[f64], n1: usize, r1_obs: f64) -> f64 {
    let n = ranks.len();
    let mean = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (r1_obs - mean).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    let mut pick: Vec<usize> = (0..n1).collect();
    loop {
        let s: f64 = pick.iter().map(|&i| ranks[i]).sum();
        total += 1;
        if (s - mean).abs() >= observed - 1e-9 {
            extreme += 1;
        }
        // next combination in lexicographic order
        let mut i = n1;
        loop {
            if i == 0 {
                return extreme as f64 / total as f64;
            }
            i -= 1;
            if pick[i] < n - n1 + i {
                break;
            }
        }
        pick[i] += 1;
        for j in i + 1..n1 {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

/// Quantile of already sorted data by linear interpolation between order
/// statistics: position `q·(n−1)` (0-based).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub values: Vec<f64>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Result<ScoreReport, MetricError> {
    if values.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ScoreReport {
        values: values.to_vec(),
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
        n: values.len(),
    })
}
