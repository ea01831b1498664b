//! Plain-text model dump. Whitespace-separated tokens, one record per line:
//!
//! ```text
//! model ridge | ridge_classifier | decision_tree | random_forest
//! features <p>
//! output <intercept> <w_1> .. <w_p>         ridge: one line per output
//! task regression|classification            trees and forests
//! classes <k>                               forests
//! tree <seed> <n_nodes>                     forests: header before each tree's nodes
//! nodes <n>                                 single tree
//! leaf <value>
//! split <feature> <threshold> <left> <right>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a dump reloads bit-exactly.

use std::fmt::Write;

use super::{DecisionTree, FittedModel, ModelError, Node, RandomForest, RidgeModel};

pub(super) fn write_model(m: &FittedModel) -> String {
    let mut s = String::new();
    match m {
        FittedModel::Ridge(r) | FittedModel::RidgeClassifier(r) => {
            let name = if matches!(m, FittedModel::Ridge(_)) { "ridge" } else { "ridge_classifier" };
            writeln!(s, "model {name}\nfeatures {}", r.n_features()).unwrap();
            for (w, b) in r.weights.iter().zip(&r.intercepts) {
                write!(s, "output {b}").unwrap();
                for v in w {
                    write!(s, " {v}").unwrap();
                }
                s.push('\n');
            }
        }
        FittedModel::Tree(t) => {
            writeln!(s, "model decision_tree\ntask {}\nfeatures {}\nnodes {}", task(t.classification), t.n_features, t.nodes.len())
                .unwrap();
            write_nodes(&mut s, &t.nodes);
        }
        FittedModel::Forest(f) => {
            writeln!(
                s,
                "model random_forest\ntask {}\nfeatures {}\nclasses {}",
                task(f.classification),
                f.n_features(),
                f.n_classes
            )
            .unwrap();
            for (t, seed) in f.trees.iter().zip(&f.tree_seeds) {
                writeln!(s, "tree {seed} {}", t.nodes.len()).unwrap();
                write_nodes(&mut s, &t.nodes);
            }
        }
    }
    s
}

fn task(classification: bool) -> &'static str {
    if classification {
        "classification"
    } else {
        "regression"
    }
}

fn write_nodes(s: &mut String, nodes: &[Node]) {
    for n in nodes {
        match n {
            Node::Leaf(v) => writeln!(s, "leaf {v}").unwrap(),
            Node::Split { feature, threshold, left, right } => {
                writeln!(s, "split {feature} {threshold} {left} {right}").unwrap()
            }
        }
    }
}

struct Lines<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> ModelError {
        let line = self.lines.get(self.at.saturating_sub(1)).map_or(0, |l| l.0);
        ModelError::Parse { line, message: message.into() }
    }

    fn next(&mut self, key: &str) -> Result<Vec<&'a str>, ModelError> {
        let Some((_, toks)) = self.lines.get(self.at).cloned() else {
            return Err(ModelError::Parse { line: 0, message: format!("unexpected end of input, expected '{key}'") });
        };
        self.at += 1;
        if toks[0] != key {
            return Err(self.err(format!("expected '{key}', found '{}'", toks[0])));
        }
        Ok(toks[1..].to_vec())
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ModelError> {
        let toks = self.next(key)?;
        match toks.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("bad value '{v}' for '{key}'"))),
            _ => Err(self.err(format!("'{key}' takes exactly one value"))),
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: &str) -> Result<T, ModelError> {
        tok.parse().map_err(|_| self.err(format!("bad number '{tok}'")))
    }

    fn task(&mut self) -> Result<bool, ModelError> {
        match self.single::<String>("task")?.as_str() {
            "regression" => Ok(false),
            "classification" => Ok(true),
            other => Err(self.err(format!("unknown task '{other}'"))),
        }
    }

    fn nodes(&mut self, count: usize) -> Result<Vec<Node>, ModelError> {
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            let Some((_, toks)) = self.lines.get(self.at).cloned() else {
                return Err(self.err("missing tree nodes"));
            };
            self.at += 1;
            nodes.push(match toks.as_slice() {
                ["leaf", v] => Node::Leaf(self.num(v)?),
                ["split", f, t, l, r] => Node::Split {
                    feature: self.num(f)?,
                    threshold: self.num(t)?,
                    left: self.num(l)?,
                    right: self.num(r)?,
                },
                _ => return Err(self.err("expected 'leaf <v>' or 'split <f> <t> <l> <r>'")),
            });
        }
        for n in &nodes {
            if let Node::Split { left, right, .. } = n {
                if *left >= count || *right >= count {
                    return Err(self.err("child index out of range"));
                }
            }
        }
        Ok(nodes)
    }
}

pub(super) fn read_model(text: &str) -> Result<FittedModel, ModelError> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    let mut p = Lines { lines, at: 0 };
    let kind: String = p.single("model")?;
    let model = match kind.as_str() {
        "ridge" | "ridge_classifier" => {
            let n_features: usize = p.single("features")?;
            let mut r = RidgeModel { weights: Vec::new(), intercepts: Vec::new() };
            while p.at < p.lines.len() {
                let toks = p.next("output")?;
                if toks.len() != n_features + 1 {
                    return Err(p.err(format!("expected {} values", n_features + 1)));
                }
                let vals = toks.iter().map(|t| p.num::<f64>(t)).collect::<Result<Vec<_>, _>>()?;
                r.intercepts.push(vals[0]);
                r.weights.push(vals[1..].to_vec());
            }
            if r.weights.is_empty() {
                return Err(p.err("ridge model without outputs"));
            }
            if kind == "ridge" {
                FittedModel::Ridge(r)
            } else {
                FittedModel::RidgeClassifier(r)
            }
        }
        "decision_tree" => {
            let classification = p.task()?;
            let n_features = p.single("features")?;
            let count = p.single("nodes")?;
            FittedModel::Tree(DecisionTree { nodes: p.nodes(count)?, n_features, classification })
        }
        "random_forest" => {
            let classification = p.task()?;
            let n_features = p.single("features")?;
            let n_classes = p.single("classes")?;
            let mut f = RandomForest { trees: Vec::new(), tree_seeds: Vec::new(), classification, n_classes };
            while p.at < p.lines.len() {
                let toks = p.next("tree")?;
                let [seed, count] = toks.as_slice() else {
                    return Err(p.err("expected 'tree <seed> <n_nodes>'"));
                };
                let (seed, count) = (p.num(seed)?, p.num(count)?);
                f.tree_seeds.push(seed);
                f.trees.push(DecisionTree { nodes: p.nodes(count)?, n_features, classification });
            }
            if f.trees.is_empty() {
                return Err(p.err("forest without trees"));
            }
            FittedModel::Forest(f)
        }
        other => return Err(p.err(format!("unknown model kind '{other}'"))),
    };
    if p.at != p.lines.len() {
        return Err(p.err("trailing content"));
    }
    Ok(model)
}
