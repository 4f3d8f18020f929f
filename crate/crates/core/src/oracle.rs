//! Brute-force reference for backtrack tie resolution.
//!
//! Works on training rows alone: a node is the set of rows matching a
//! prefix of branch constraints, and moving to the parent drops the last
//! constraint. Nothing here touches the tree or the tally types, so it can
//! check them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::induction::{NodeId, Tree};
use crate::predictor::{resolve_seeded, Prediction, TieStrategy};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleVerdict {
    pub label: String,
    /// Outcomes still tied when the walk stopped, sorted.
    pub candidates: Vec<String>,
    pub randomized: bool,
}

fn counts_matching(dataset: &Dataset, constraints: &[(usize, &str)]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for row in dataset.rows() {
        if constraints.iter().all(|&(a, v)| row.values[a] == v) {
            *counts.entry(row.outcome.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Predicts for the rows selected by `constraints` (root-first), widening
/// the selection one constraint at a time while the top outcomes tie.
pub fn oracle_predict<R: Rng + ?Sized>(
    dataset: &Dataset,
    constraints: &[(String, String)],
    rng: &mut R,
) -> Result<OracleVerdict> {
    let resolved = constraints
        .iter()
        .map(|(name, value)| {
            dataset
                .attribute_index(name)
                .map(|a| (a, value.as_str()))
                .ok_or_else(|| Error::UnknownAttribute { attribute: name.clone() })
        })
        .collect::<Result<Vec<_>>>()?;

    let counts = counts_matching(dataset, &resolved);
    let best = *counts.values().max().ok_or(Error::NoMatchingRows)?;
    let mut candidates: Vec<String> = counts.into_iter().filter(|&(_, c)| c == best).map(|(o, _)| o).collect();

    let mut prefix = resolved.len();
    while candidates.len() > 1 && prefix > 0 {
        prefix -= 1;
        let counts = counts_matching(dataset, &resolved[..prefix]);
        let count_of = |o: &String| counts.get(o).copied().unwrap_or(0);
        let best = candidates.iter().map(count_of).max().unwrap_or(0);
        candidates.retain(|o| count_of(o) == best);
    }

    if candidates.len() == 1 {
        Ok(OracleVerdict { label: candidates[0].clone(), candidates, randomized: false })
    } else {
        let label = candidates[rng.random_range(0..candidates.len())].clone();
        Ok(OracleVerdict { label, candidates, randomized: true })
    }
}

/// Outcome of checking one leaf against the oracle.
#[derive(Clone, Debug, Serialize)]
pub struct LeafCheck {
    pub leaf: NodeId,
    pub constraints: Vec<(String, String)>,
    pub tree: Prediction,
    pub oracle: OracleVerdict,
    pub passed: bool,
}

/// Agreement rule: equal labels when neither side needed randomness, equal
/// tied sets when both fell back to it.
pub fn agrees(tree: &Prediction, oracle: &OracleVerdict) -> bool {
    match (tree.randomized, oracle.randomized) {
        (false, false) => tree.label == oracle.label,
        (true, true) => tree.final_candidates() == oracle.candidates.as_slice(),
        _ => false,
    }
}

/// Runs backtrack resolution and the oracle on every leaf of `tree`, with
/// the same per-leaf random stream for both.
pub fn verify_tree(dataset: &Dataset, tree: &Tree, seed: u64) -> Result<Vec<LeafCheck>> {
    verify_tree_with(dataset, tree, seed, |t, leaf, s| resolve_seeded(t, leaf, TieStrategy::Backtrack, s))
}

/// [`verify_tree`] with a substitute resolver, for checking that the
/// verification catches a faulty one.
pub fn verify_tree_with<F>(dataset: &Dataset, tree: &Tree, seed: u64, resolver: F) -> Result<Vec<LeafCheck>>
where
    F: Fn(&Tree, NodeId, u64) -> Result<Prediction>,
{
    tree.leaves()
        .map(|leaf| {
            let id = leaf.id();
            let constraints = tree.path_constraints(id)?;
            let prediction = resolver(tree, id, seed)?;
            let verdict = oracle_predict(dataset, &constraints, &mut rng::stream(seed, &[id.0 as u64]))?;
            let passed = agrees(&prediction, &verdict);
            Ok(LeafCheck { leaf: id, constraints, tree: prediction, oracle: verdict, passed })
        })
        .collect()
}
