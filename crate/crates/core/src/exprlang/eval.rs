use std::fmt;

use super::{BinaryOp, ExprTree};
use crate::data::Dataset;

/// Denominators with magnitude at or below this are treated as zero.
pub const PDIV_EPSILON: f64 = 1e-9;
/// Result of a protected division by (near) zero.
pub const PDIV_FALLBACK: f64 = 1.0;

/// Protected division: `a / b`, or [`PDIV_FALLBACK`] when `|b| <= 1e-9`.
pub fn pdiv(a: f64, b: f64) -> f64 {
    if b.abs() > PDIV_EPSILON {
        a / b
    } else {
        PDIV_FALLBACK
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    UnknownFeature(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnknownFeature(name) => write!(f, "unknown feature '{name}'"),
        }
    }
}

impl std::error::Error for EvalError {}

// Overflow saturates instead of propagating inf/NaN through later nodes.
#[inline]
fn saturate(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else if x.is_nan() {
        0.0
    } else if x > 0.0 {
        f64::MAX
    } else {
        f64::MIN
    }
}

/// Evaluates `tree` on every row of `data`.
///
/// Every output is finite when the input columns are finite.
pub fn eval_column(tree: &ExprTree, data: &Dataset) -> Result<Vec<f64>, EvalError> {
    eval_with(tree, &|name| data.column(name))
}

/// Evaluates against an arbitrary name→column lookup. All columns must share one length.
pub(crate) fn eval_with<'a>(
    tree: &ExprTree,
    lookup: &dyn Fn(&str) -> Option<&'a [f64]>,
) -> Result<Vec<f64>, EvalError> {
    match tree {
        ExprTree::Feature(name) => lookup(name)
            .map(|c| c.to_vec())
            .ok_or_else(|| EvalError::UnknownFeature(name.to_string())),
        ExprTree::Unary(op, child) => {
            let mut v = eval_with(child, lookup)?;
            for x in v.iter_mut() {
                *x = saturate(op.apply(*x));
            }
            Ok(v)
        }
        ExprTree::Binary(op, l, r) => {
            let mut a = eval_with(l, lookup)?;
            let b = eval_with(r, lookup)?;
            match op {
                BinaryOp::Add => a.iter_mut().zip(&b).for_each(|(x, y)| *x = saturate(*x + y)),
                BinaryOp::Sub => a.iter_mut().zip(&b).for_each(|(x, y)| *x = saturate(*x - y)),
                BinaryOp::Mul => a.iter_mut().zip(&b).for_each(|(x, y)| *x = saturate(*x * y)),
                BinaryOp::PDiv => a.iter_mut().zip(&b).for_each(|(x, y)| *x = saturate(pdiv(*x, *y))),
            }
            Ok(a)
        }
    }
}
