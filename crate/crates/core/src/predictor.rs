//! Query routing and outcome tie resolution.
//!
//! The backtrack strategy settles a tie at the reached node by looking at
//! the ancestors' tallies, restricted to the outcomes still tied, one
//! parent at a time. Only when the tie survives the root does it fall back
//! to a uniform random pick. The random strategy makes that pick right at
//! the reached node.
//!
//! Each ancestor's rows are a superset of its descendants', so its tally
//! already contains the counts below it. Since the tied candidates hold
//! equal counts whenever the walk moves up, comparing the ancestor's own
//! counts picks the same winner as summing counts along the chain.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Histogram, Row};
use crate::error::{Error, Result};
use crate::induction::{Annotation, NodeId, Tree};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieStrategy {
    Backtrack,
    Random,
}

impl TieStrategy {
    pub const ALL: [TieStrategy; 2] = [TieStrategy::Backtrack, TieStrategy::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            TieStrategy::Backtrack => "backtrack",
            TieStrategy::Random => "random",
        }
    }

    /// Stable stream coordinate for this strategy's random draws.
    pub(crate) fn stream_tag(self) -> u64 {
        match self {
            TieStrategy::Backtrack => 1,
            TieStrategy::Random => 2,
        }
    }
}

impl fmt::Display for TieStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TieStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backtrack" => Ok(TieStrategy::Backtrack),
            "random" => Ok(TieStrategy::Random),
            other => Err(Error::InvalidParameter(format!("unknown tie strategy {other:?}"))),
        }
    }
}

/// Attribute values keyed by attribute name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Query {
    values: BTreeMap<String, String>,
}

impl Query {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, attribute: impl Into<String>, value: impl Into<String>) -> Self {
        self.values.insert(attribute.into(), value.into());
        self
    }

    /// Parses `name=value` pairs separated by commas. Each pair splits on
    /// its first `=`, so names may contain spaces; surrounding whitespace
    /// is trimmed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for pair in text.split(',') {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::MalformedQuery(format!("{pair:?} is not a name=value pair")))?;
            let (name, value) = (name.trim(), value.trim());
            if name.is_empty() {
                return Err(Error::MalformedQuery(format!("{pair:?} has an empty attribute name")));
            }
            if values.insert(name.to_owned(), value.to_owned()).is_some() {
                return Err(Error::MalformedQuery(format!("attribute {name:?} given twice")));
            }
        }
        Ok(Self { values })
    }

    /// Query holding every attribute value of a training row.
    pub fn from_row(attribute_names: &[String], row: &Row) -> Self {
        Self {
            values: attribute_names.iter().cloned().zip(row.values.iter().cloned()).collect(),
        }
    }

    pub fn get(&self, attribute: &str) -> Option<&str> {
        self.values.get(attribute).map(String::as_str)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> + '_ {
        self.values.keys().map(String::as_str)
    }
}

/// One node visited while resolving a tie.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub node: NodeId,
    /// Outcomes tied for the maximum after this step, sorted.
    pub candidates: Vec<String>,
    /// Counts at this node for the outcomes under consideration: the whole
    /// tally at the first step, the previously tied outcomes afterwards.
    pub counts: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    /// The node routing stopped at; a leaf unless a query value was unseen.
    pub leaf: NodeId,
    pub steps: Vec<Step>,
    pub randomized: bool,
}

impl Prediction {
    /// Candidate set the final decision was made from.
    pub fn final_candidates(&self) -> &[String] {
        &self.steps.last().expect("predictions have at least one step").candidates
    }

    /// Whether the reached node itself had more than one top outcome.
    pub fn was_tied(&self) -> bool {
        self.steps[0].candidates.len() > 1
    }

    pub fn to_json(&self) -> String {
        crate::to_sorted_json_compact(self)
    }
}

/// Descends from the root along the query's values. Stops at a leaf, or at
/// an internal node with no branch for the query's value.
pub fn route(tree: &Tree, query: &Query) -> Result<NodeId> {
    let mut id = tree.root();
    loop {
        let node = tree.node(id)?;
        let Some(attribute) = node.split_attribute() else {
            return Ok(id);
        };
        let name = &tree.attribute_names()[attribute];
        let value = query
            .get(name)
            .ok_or_else(|| Error::MissingAttribute { attribute: name.clone() })?;
        match node.child(value) {
            Some(child) => id = child,
            None => return Ok(id),
        }
    }
}

/// Outcomes reaching the highest count, optionally only among `restrict`
/// (where absent outcomes count zero).
pub fn max_candidates(tally: &Histogram, restrict: Option<&BTreeSet<String>>) -> Result<BTreeSet<String>> {
    let considered: Vec<(&str, usize)> = match restrict {
        Some(set) => set.iter().map(|o| (o.as_str(), tally.count(o))).collect(),
        None => tally.iter().collect(),
    };
    let max = considered.iter().map(|&(_, c)| c).max().ok_or(Error::NoCandidates)?;
    Ok(considered
        .into_iter()
        .filter(|&(_, c)| c == max)
        .map(|(o, _)| o.to_owned())
        .collect())
}

fn pick_uniform<R: Rng + ?Sized>(candidates: &BTreeSet<String>, rng: &mut R) -> String {
    let sorted: Vec<&String> = candidates.iter().collect();
    sorted[rng.random_range(0..sorted.len())].clone()
}

fn first_step(tree: &Tree, node: NodeId) -> Result<(BTreeSet<String>, Step)> {
    let tally = tree.node(node)?.tally();
    let candidates = max_candidates(tally, None)?;
    let step = Step {
        node,
        candidates: candidates.iter().cloned().collect(),
        counts: tally.counts().clone(),
    };
    Ok((candidates, step))
}

/// Resolves the label at `leaf` by walking up the ancestor chain while the
/// top outcomes stay tied. `rng` is consulted only if the tie survives the
/// root.
pub fn resolve_backtrack<R: Rng + ?Sized>(tree: &Tree, leaf: NodeId, rng: &mut R) -> Result<Prediction> {
    let (mut candidates, step) = first_step(tree, leaf)?;
    let mut steps = vec![step];

    for ancestor in tree.ancestor_chain(leaf)? {
        if candidates.len() <= 1 {
            break;
        }
        let tally = tree.node(ancestor)?.tally();
        let counts: BTreeMap<String, usize> = candidates.iter().map(|o| (o.clone(), tally.count(o))).collect();
        assert!(
            counts.values().all(|&c| c > 0),
            "ancestor {ancestor} lacks an outcome present below it"
        );
        candidates = max_candidates(tally, Some(&candidates))?;
        steps.push(Step {
            node: ancestor,
            candidates: candidates.iter().cloned().collect(),
            counts,
        });
    }

    let (label, randomized) = match candidates.len() {
        1 => (candidates.into_iter().next().expect("one candidate"), false),
        _ => (pick_uniform(&candidates, rng), true),
    };
    Ok(Prediction { label, leaf, steps, randomized })
}

/// Picks uniformly among the top outcomes at `leaf`.
pub fn resolve_random<R: Rng + ?Sized>(tree: &Tree, leaf: NodeId, rng: &mut R) -> Result<Prediction> {
    let (candidates, step) = first_step(tree, leaf)?;
    let (label, randomized) = match candidates.len() {
        1 => (candidates.into_iter().next().expect("one candidate"), false),
        _ => (pick_uniform(&candidates, rng), true),
    };
    Ok(Prediction { label, leaf, steps: vec![step], randomized })
}

pub fn resolve<R: Rng + ?Sized>(tree: &Tree, node: NodeId, strategy: TieStrategy, rng: &mut R) -> Result<Prediction> {
    match strategy {
        TieStrategy::Backtrack => resolve_backtrack(tree, node, rng),
        TieStrategy::Random => resolve_random(tree, node, rng),
    }
}

/// Resolves `node` with the random stream reserved for it under `seed`.
/// [`annotate_labels`] uses the same streams, so the two always agree.
pub fn resolve_seeded(tree: &Tree, node: NodeId, strategy: TieStrategy, seed: u64) -> Result<Prediction> {
    resolve(tree, node, strategy, &mut rng::stream(seed, &[node.0 as u64]))
}

pub fn predict<R: Rng + ?Sized>(tree: &Tree, query: &Query, strategy: TieStrategy, rng: &mut R) -> Result<Prediction> {
    let node = route(tree, query)?;
    resolve(tree, node, strategy, rng)
}

/// Routes and resolves with the per-node stream of `seed`, matching the
/// labels [`annotate_labels`] stored with the same seed.
pub fn predict_seeded(tree: &Tree, query: &Query, strategy: TieStrategy, seed: u64) -> Result<Prediction> {
    let node = route(tree, query)?;
    resolve_seeded(tree, node, strategy, seed)
}

/// Stores a resolved label on every node, internal ones included since an
/// unseen query value can stop routing there.
pub fn annotate_labels(mut tree: Tree, strategy: TieStrategy, seed: u64) -> Tree {
    let ids: Vec<NodeId> = tree.nodes().iter().map(|n| n.id()).collect();
    for id in ids {
        let prediction = resolve_seeded(&tree, id, strategy, seed).expect("node ids come from the tree");
        tree.set_resolved_label(id, prediction.label);
    }
    tree.set_annotation(Annotation { strategy, seed });
    tree
}
