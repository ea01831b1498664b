use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GpError, Individual};
use crate::exprlang::{random_full, ExprTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    SwapSubtree,
    SwapTree,
    SubtreeMutation,
    AddTree,
    RemoveTree,
}

impl Operator {
    pub const ALL: [Operator; 5] =
        [Operator::SwapSubtree, Operator::SwapTree, Operator::SubtreeMutation, Operator::AddTree, Operator::RemoveTree];

    pub fn is_crossover(self) -> bool {
        matches!(self, Operator::SwapSubtree | Operator::SwapTree)
    }
}

/// Probability of each variation operator per offspring event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorProbs {
    pub swap_subtree: f64,
    pub swap_tree: f64,
    pub subtree_mutation: f64,
    pub add_tree: f64,
    pub remove_tree: f64,
}

impl Default for OperatorProbs {
    fn default() -> Self {
        OperatorProbs {
            swap_subtree: 1.0 / 4.0,
            swap_tree: 1.0 / 4.0,
            subtree_mutation: 1.0 / 6.0,
            add_tree: 1.0 / 6.0,
            remove_tree: 1.0 / 6.0,
        }
    }
}

impl OperatorProbs {
    pub fn as_array(&self) -> [f64; 5] {
        [self.swap_subtree, self.swap_tree, self.subtree_mutation, self.add_tree, self.remove_tree]
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let p = self.as_array();
        if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(GpError::InvalidConfig(format!("operator probabilities must lie in [0, 1]: {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(GpError::InvalidConfig(format!("operator probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Operator {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (op, p) in Operator::ALL.iter().zip(self.as_array()) {
            acc += p;
            if u < acc {
                return *op;
            }
        }
        // rounding left a sliver above the cumulative sum: take the last operator with mass
        *Operator::ALL.iter().zip(self.as_array()).rev().find(|(_, p)| *p > 0.0).map(|(o, _)| o).unwrap_or(&Operator::RemoveTree)
    }
}

fn offspring(trees: Vec<ExprTree>) -> Individual {
    Individual::new(trees)
}

fn within_limit(ind: &Individual, depth_limit: usize) -> bool {
    ind.trees.iter().all(|t| t.depth() <= depth_limit)
}

fn pick_node<R: Rng + ?Sized>(ind: &Individual, rng: &mut R) -> (usize, usize) {
    let t = rng.gen_range(0..ind.trees.len());
    let n = rng.gen_range(0..ind.trees[t].size());
    (t, n)
}

/// Exchanges a uniformly chosen subtree between uniformly chosen trees of
/// each parent. An offspring breaking the depth limit is replaced by a copy
/// of the parent it was derived from.
pub fn crossover_swap_subtree<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    depth_limit: usize,
    rng: &mut R,
) -> (Individual, Individual) {
    let (ta, na) = pick_node(a, rng);
    let (tb, nb) = pick_node(b, rng);
    let sub_a = a.trees[ta].node(na).expect("index within size").clone();
    let sub_b = b.trees[tb].node(nb).expect("index within size").clone();

    let mut ca = a.trees.clone();
    ca[ta].replace(na, sub_b);
    let mut cb = b.trees.clone();
    cb[tb].replace(nb, sub_a);
    let (ca, cb) = (offspring(ca), offspring(cb));
    let ca = if within_limit(&ca, depth_limit) { ca } else { offspring(a.trees.clone()) };
    let cb = if within_limit(&cb, depth_limit) { cb } else { offspring(b.trees.clone()) };
    (ca, cb)
}

/// Exchanges one whole tree (dimension) between the parents.
pub fn crossover_swap_tree<R: Rng + ?Sized>(a: &Individual, b: &Individual, rng: &mut R) -> (Individual, Individual) {
    let ta = rng.gen_range(0..a.trees.len());
    let tb = rng.gen_range(0..b.trees.len());
    let mut ca = a.trees.clone();
    let mut cb = b.trees.clone();
    std::mem::swap(&mut ca[ta], &mut cb[tb]);
    (offspring(ca), offspring(cb))
}

/// Replaces a uniformly chosen node with a new full tree of depth `new_depth`.
pub fn mutate_subtree<R: Rng + ?Sized>(
    a: &Individual,
    schema: &[Arc<str>],
    new_depth: usize,
    depth_limit: usize,
    rng: &mut R,
) -> Individual {
    let (t, n) = pick_node(a, rng);
    let fresh = random_full(new_depth, schema, rng).expect("non-empty schema");
    let mut trees = a.trees.clone();
    trees[t].replace(n, fresh);
    let child = offspring(trees);
    if within_limit(&child, depth_limit) {
        child
    } else {
        offspring(a.trees.clone())
    }
}

/// Appends a new full tree of depth `new_depth`.
pub fn mutate_add_tree<R: Rng + ?Sized>(a: &Individual, schema: &[Arc<str>], new_depth: usize, rng: &mut R) -> Individual {
    let mut trees = a.trees.clone();
    trees.push(random_full(new_depth, schema, rng).expect("non-empty schema"));
    offspring(trees)
}

/// Deletes a uniformly chosen tree; a single-tree individual is copied unchanged.
pub fn mutate_remove_tree<R: Rng + ?Sized>(a: &Individual, rng: &mut R) -> Individual {
    let mut trees = a.trees.clone();
    if trees.len() > 1 {
        trees.remove(rng.gen_range(0..trees.len()));
    }
    offspring(trees)
}
