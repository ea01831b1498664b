//! Expression-tree feature engineering for tabular data.
//!
//! Two stages share one representation ([`exprlang::ExprTree`]):
//! curated derived-feature recipes applied once per dataset, then multi-tree
//! genetic programming ([`gp`]) that evolves a dataset transformation scored
//! by a wrapped learner ([`models`]).
//!
//! Depth convention throughout: a lone terminal has depth 1.

pub mod data;
pub mod exprlang;
pub mod gp;
pub mod llmfeat;
pub mod metrics;
pub mod models;
