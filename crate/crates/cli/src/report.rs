use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use featurecraft_core::gp::RunLog;
use featurecraft_core::metrics::{mann_whitney_u, summarize};
use featurecraft_core::models::Metric;
use serde::{Deserialize, Serialize};

use crate::run::{trial_dir, ExperimentResult, RESULT_FILE, RUNLOG_FILE};

/// Significance threshold for the report's highlight marker.
pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marker {
    Better,
    Worse,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub experiment: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n: usize,
}

/// Experiment A against experiment B; the marker reads "A is ... than B".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub dataset: String,
    pub metric: Metric,
    pub a: Side,
    pub b: Side,
    pub u: f64,
    pub p: f64,
    pub marker: Marker,
}

/// `Better`/`Worse` only when `p < 0.01` and the medians differ in that direction.
pub fn marker(metric: Metric, median_a: f64, median_b: f64, p: f64) -> Marker {
    if p >= SIGNIFICANCE || median_a == median_b {
        return Marker::Tie;
    }
    if (median_a > median_b) == metric.maximize() {
        Marker::Better
    } else {
        Marker::Worse
    }
}

pub fn compare(a: &ExperimentResult, b: &ExperimentResult) -> Result<Comparison> {
    if a.dataset != b.dataset || a.metric != b.metric {
        bail!(
            "cannot compare {} ({} on {}) with {} ({} on {})",
            a.experiment,
            a.metric.name(),
            a.dataset,
            b.experiment,
            b.metric.name(),
            b.dataset
        );
    }
    let side = |r: &ExperimentResult| -> Result<Side> {
        let s = r.report.clone().with_context(|| format!("{} has no successful trials", r.experiment))?;
        Ok(Side { experiment: r.experiment.clone(), median: s.median, q1: s.q1, q3: s.q3, n: s.n })
    };
    let (sa, sb) = (side(a)?, side(b)?);
    let mw = mann_whitney_u(&a.scores(), &b.scores())?;
    Ok(Comparison {
        dataset: a.dataset.clone(),
        metric: a.metric,
        marker: marker(a.metric, sa.median, sb.median, mw.p),
        a: sa,
        b: sb,
        u: mw.u,
        p: mw.p,
    })
}

/// Compares the summaries in two experiment directories.
pub fn cmd_report(a: &Path, b: &Path) -> Result<Comparison> {
    compare(&ExperimentResult::load(a)?, &ExperimentResult::load(b)?)
}

impl Comparison {
    /// Aligned table, three decimals.
    pub fn to_text(&self) -> String {
        let width = self.a.experiment.len().max(self.b.experiment.len()).max("experiment".len());
        let better = if self.metric.maximize() { "higher" } else { "lower" };
        let mut s = format!("dataset: {}   metric: {} ({better} is better)\n", self.dataset, self.metric.name());
        let _ = writeln!(s, "{:<width$}  {:>10}  {:>10}  {:>10}  {:>4}", "experiment", "median", "q1", "q3", "n");
        for side in [&self.a, &self.b] {
            let _ = writeln!(
                s,
                "{:<width$}  {:>10.3}  {:>10.3}  {:>10.3}  {:>4}",
                side.experiment, side.median, side.q1, side.q3, side.n
            );
        }
        let p = if self.p < 0.001 { "<0.001".to_string() } else { format!("{:.3}", self.p) };
        let flag = if self.marker == Marker::Tie { "" } else { " *" };
        let verdict = match self.marker {
            Marker::Better => "better than",
            Marker::Worse => "worse than",
            Marker::Tie => "not significantly different from",
        };
        let _ = writeln!(s, "p = {p} (U = {:.1}): {} is {verdict} {}{flag}", self.u, self.a.experiment, self.b.experiment);
        s
    }
}

/// One row of convergence-curve data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub generation: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Trials contributing to this generation.
    pub n: usize,
}

/// Per-generation median and quartiles of the test metric across the
/// completed trials of an experiment directory.
pub fn cmd_plotdata(exp_dir: &Path) -> Result<Vec<PlotRow>> {
    let entries = fs::read_dir(exp_dir).with_context(|| format!("reading {}", exp_dir.display()))?;
    let mut trials: Vec<usize> = entries
        .filter_map(|e| e.ok()?.file_name().to_str()?.strip_prefix("trial_")?.parse().ok())
        .collect();
    trials.sort_unstable();
    let mut logs = Vec::new();
    for trial in trials {
        let dir = trial_dir(exp_dir, trial);
        if !dir.join(RESULT_FILE).exists() {
            continue;
        }
        let path = dir.join(RUNLOG_FILE);
        let text = fs::read_to_string(&path).with_context(|| format!("missing run log {}", path.display()))?;
        logs.push(RunLog::from_jsonl(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    if logs.is_empty() {
        bail!("no completed trials with run logs under {}", exp_dir.display());
    }
    let generations = logs.iter().map(|l| l.records.len()).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(generations);
    for g in 0..generations {
        let values = logs
            .iter()
            .filter_map(|l| l.records.get(g))
            .map(|r| r.test_metric.with_context(|| format!("generation {g} has no test metric")))
            .collect::<Result<Vec<f64>>>()?;
        let s = summarize(&values)?;
        rows.push(PlotRow { generation: g, median: s.median, q1: s.q1, q3: s.q3, n: s.n });
    }
    Ok(rows)
}

/// CSV with header `generation,median,q1,q3`, full precision.
pub fn plot_csv(rows: &[PlotRow]) -> String {
    let mut s = String::from("generation,median,q1,q3\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.generation, r.median, r.q1, r.q3);
    }
    s
}
