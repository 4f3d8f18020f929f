//! Categorical decision trees whose outcome ties are broken by backtracking
//! through ancestor tallies.
//!
//! A tree is grown with ID3 ([`induction::build_tree`]); every node keeps
//! the training rows reaching it and their outcome counts. When the top
//! outcomes at a leaf are tied, [`predictor::resolve_backtrack`] moves to
//! the parent and compares the tied outcomes there, continuing upward until
//! one wins or the root is passed, in which case it picks uniformly at
//! random. [`predictor::resolve_random`] is the plain random baseline,
//! [`oracle`] restates the backtrack rule over raw rows as a cross-check,
//! and [`evaluation`] compares the two strategies on shared folds.
//!
//! ```
//! use backtrack_tree::{build_tree, predict, Dataset, Query, TieStrategy};
//!
//! let tree = build_tree(&Dataset::builtin_table1());
//! let query = Query::new().with("Attr A", "a0").with("Attr B", "b0");
//! let mut rng = backtrack_tree::rng::stream(0, &[]);
//! let prediction = predict(&tree, &query, TieStrategy::Backtrack, &mut rng).unwrap();
//! assert_eq!(prediction.label, "t1");
//! assert!(!prediction.randomized);
//! ```

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod induction;
pub mod oracle;
pub mod predictor;
pub mod rng;

pub use dataset::{Dataset, Histogram, Row};
pub use error::{Error, Result};
pub use evaluation::{evaluate, generate_tie_heavy, sign_test, EvalMethod, EvalReport, TieHeavyParams};
pub use induction::{build_tree, entropy, information_gain, NodeId, Tree, TreeNode};
pub use oracle::{oracle_predict, verify_tree, OracleVerdict};
pub use predictor::{
    annotate_labels, max_candidates, predict, predict_seeded, resolve_backtrack, resolve_random, route, Prediction,
    Query, Step, TieStrategy,
};

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub(crate) fn to_sorted_json<T: serde::Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string_pretty(&value).expect("json value")
}

pub(crate) fn to_sorted_json_compact<T: serde::Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string(&value).expect("json value")
}
