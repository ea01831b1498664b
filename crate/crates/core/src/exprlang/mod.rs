//! Arithmetic expression trees over named dataset features.
//!
//! The same tree type carries both GP genetic material and the derived
//! features of a curated recipe. GP evolution only ever builds the four
//! binary operators; the unary operators exist for recipes.
//!
//! Depth convention: a lone terminal has depth 1. A full binary tree of
//! depth `d` therefore has `2^d - 1` nodes.

mod eval;
mod parse;
mod random;
mod recipe;

use std::fmt;
use std::sync::Arc;

pub use eval::{eval_column, pdiv, EvalError, PDIV_EPSILON, PDIV_FALLBACK};
pub use parse::{parse, ParseError};
pub use random::{random_full, GP_FUNCTIONS};
pub use recipe::{FeatureRecipe, RecipeEntry, RecipeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    /// Protected division, see [`pdiv`].
    PDiv,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::PDiv => '/',
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::PDiv => 2,
        }
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::PDiv => pdiv(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    /// `ln(x)` for `x > 1e-12`, otherwise 0.
    LogS,
    /// `sqrt(|x|)`.
    SqrtS,
    Pow2,
    Pow3,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::LogS => "log",
            UnaryOp::SqrtS => "sqrt",
            UnaryOp::Pow2 => "pow2",
            UnaryOp::Pow3 => "pow3",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        match name {
            "log" => Some(UnaryOp::LogS),
            "sqrt" => Some(UnaryOp::SqrtS),
            "pow2" => Some(UnaryOp::Pow2),
            "pow3" => Some(UnaryOp::Pow3),
            _ => None,
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::LogS => {
                if x > 1e-12 {
                    x.ln()
                } else {
                    0.0
                }
            }
            UnaryOp::SqrtS => x.abs().sqrt(),
            UnaryOp::Pow2 => x * x,
            UnaryOp::Pow3 => x * x * x,
        }
    }
}

/// An expression tree. Feature names are shared (`Arc<str>`) so that cloning
/// large GP populations stays cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprTree {
    Feature(Arc<str>),
    Unary(UnaryOp, Box<ExprTree>),
    Binary(BinaryOp, Box<ExprTree>, Box<ExprTree>),
}

impl ExprTree {
    pub fn feature(name: impl Into<Arc<str>>) -> ExprTree {
        ExprTree::Feature(name.into())
    }

    pub fn unary(op: UnaryOp, child: ExprTree) -> ExprTree {
        ExprTree::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: ExprTree, right: ExprTree) -> ExprTree {
        ExprTree::Binary(op, Box::new(left), Box::new(right))
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn depth(&self) -> usize {
        match self {
            ExprTree::Feature(_) => 1,
            ExprTree::Unary(_, c) => 1 + c.depth(),
            ExprTree::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        match self {
            ExprTree::Feature(_) => 1,
            ExprTree::Unary(_, c) => 1 + c.size(),
            ExprTree::Binary(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Names of all referenced features, in pre-order, with repetitions.
    pub fn features(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_features(&mut out);
        out
    }

    fn collect_features<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ExprTree::Feature(name) => out.push(name),
            ExprTree::Unary(_, c) => c.collect_features(out),
            ExprTree::Binary(_, l, r) => {
                l.collect_features(out);
                r.collect_features(out);
            }
        }
    }

    /// The node at pre-order position `index` (root is 0).
    pub fn node(&self, index: usize) -> Option<&ExprTree> {
        if index == 0 {
            return Some(self);
        }
        let mut rest = index - 1;
        for child in self.children() {
            let s = child.size();
            if rest < s {
                return child.node(rest);
            }
            rest -= s;
        }
        None
    }

    /// Depth (in nodes) at which the pre-order node `index` sits; the root is at level 1.
    pub fn level_of(&self, index: usize) -> Option<usize> {
        if index == 0 {
            return Some(1);
        }
        let mut rest = index - 1;
        for child in self.children() {
            let s = child.size();
            if rest < s {
                return child.level_of(rest).map(|l| l + 1);
            }
            rest -= s;
        }
        None
    }

    /// Replaces the subtree at pre-order position `index`, returning the old one.
    ///
    /// Panics if `index >= self.size()`.
    pub fn replace(&mut self, index: usize, subtree: ExprTree) -> ExprTree {
        if index == 0 {
            return std::mem::replace(self, subtree);
        }
        let mut rest = index - 1;
        match self {
            ExprTree::Feature(_) => panic!("node index out of range"),
            ExprTree::Unary(_, c) => c.replace(rest, subtree),
            ExprTree::Binary(_, l, r) => {
                let ls = l.size();
                if rest < ls {
                    l.replace(rest, subtree)
                } else {
                    rest -= ls;
                    r.replace(rest, subtree)
                }
            }
        }
    }

    fn children(&self) -> impl Iterator<Item = &ExprTree> {
        let (a, b): (Option<&ExprTree>, Option<&ExprTree>) = match self {
            ExprTree::Feature(_) => (None, None),
            ExprTree::Unary(_, c) => (Some(c), None),
            ExprTree::Binary(_, l, r) => (Some(l), Some(r)),
        };
        a.into_iter().chain(b)
    }

    /// Infix text with minimal parentheses; `parse` reads it back to an equal tree.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s);
        s
    }

    fn write_text(&self, out: &mut String) {
        match self {
            ExprTree::Feature(name) => write_identifier(name, out),
            ExprTree::Unary(op, c) => {
                out.push_str(op.name());
                out.push('(');
                c.write_text(out);
                out.push(')');
            }
            ExprTree::Binary(op, l, r) => {
                let p = op.precedence();
                // left-associative: the right operand needs parentheses at equal precedence
                let wrap_left = matches!(**l, ExprTree::Binary(lop, ..) if lop.precedence() < p);
                let wrap_right = matches!(**r, ExprTree::Binary(rop, ..) if rop.precedence() <= p);
                write_wrapped(l, wrap_left, out);
                out.push(' ');
                out.push(op.symbol());
                out.push(' ');
                write_wrapped(r, wrap_right, out);
            }
        }
    }
}

fn write_wrapped(t: &ExprTree, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        t.write_text(out);
        out.push(')');
    } else {
        t.write_text(out);
    }
}

pub(crate) fn is_plain_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Writes a feature name, quoting it when it is not a plain identifier.
pub(crate) fn write_identifier(name: &str, out: &mut String) {
    if is_plain_identifier(name) {
        out.push_str(name);
        return;
    }
    out.push('"');
    for c in name.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: &str) -> ExprTree {
        ExprTree::feature(n)
    }

    #[test]
    fn depth_and_size() {
        assert_eq!((f("a").depth(), f("a").size()), (1, 1));
        let t = ExprTree::binary(BinaryOp::Add, f("a"), f("b"));
        assert_eq!((t.depth(), t.size()), (2, 3));
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let pd = ExprTree::binary(BinaryOp::PDiv, f("a"), f("b"));
        assert_eq!(pd.to_text(), "a / b");
        let amc = ExprTree::binary(BinaryOp::Add, f("a"), ExprTree::binary(BinaryOp::Mul, f("b"), f("c")));
        assert_eq!(amc.to_text(), "a + b * c");
        let mac = ExprTree::binary(BinaryOp::Mul, ExprTree::binary(BinaryOp::Add, f("a"), f("b")), f("c"));
        assert_eq!(mac.to_text(), "(a + b) * c");
        let right_sub = ExprTree::binary(BinaryOp::Sub, f("a"), ExprTree::binary(BinaryOp::Sub, f("b"), f("c")));
        assert_eq!(right_sub.to_text(), "a - (b - c)");
        let spaced = ExprTree::unary(UnaryOp::LogS, f("fly ash"));
        assert_eq!(spaced.to_text(), "log(\"fly ash\")");
    }

    #[test]
    fn node_addressing_is_preorder() {
        // (a + b) * c : 0 = *, 1 = +, 2 = a, 3 = b, 4 = c
        let mut t = ExprTree::binary(BinaryOp::Mul, ExprTree::binary(BinaryOp::Add, f("a"), f("b")), f("c"));
        assert_eq!(t.node(3), Some(&f("b")));
        assert_eq!(t.node(4), Some(&f("c")));
        assert_eq!(t.node(5), None);
        assert_eq!(t.level_of(3), Some(3));
        assert_eq!(t.level_of(4), Some(2));
        let old = t.replace(1, f("z"));
        assert_eq!(old.size(), 3);
        assert_eq!(t.to_text(), "z * c");
    }
}
