use std::sync::Arc;

use rand::Rng;

use super::{BinaryOp, ExprTree};

/// The function set used by GP evolution.
pub const GP_FUNCTIONS: [BinaryOp; 4] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::PDiv];

/// Full-method tree: every leaf sits at exactly `depth`, internal nodes are
/// drawn uniformly from [`GP_FUNCTIONS`] and leaves uniformly from `schema`.
///
/// Returns `None` when `schema` is empty or `depth` is 0.
pub fn random_full<R: Rng + ?Sized>(depth: usize, schema: &[Arc<str>], rng: &mut R) -> Option<ExprTree> {
    if schema.is_empty() || depth == 0 {
        return None;
    }
    Some(build(depth, schema, rng))
}

fn build<R: Rng + ?Sized>(depth: usize, schema: &[Arc<str>], rng: &mut R) -> ExprTree {
    if depth == 1 {
        return ExprTree::Feature(schema[rng.gen_range(0..schema.len())].clone());
    }
    let op = GP_FUNCTIONS[rng.gen_range(0..GP_FUNCTIONS.len())];
    let l = build(depth - 1, schema, rng);
    let r = build(depth - 1, schema, rng);
    ExprTree::binary(op, l, r)
}
