//! ID3 induction over categorical attributes.
//!
//! Nodes live in an arena indexed by [`NodeId`] and are numbered in
//! breadth-first order, children visited in byte order of their branch
//! value. Each node keeps the training rows that reach it and their outcome
//! tally; tie resolution reads those tallies back up the parent chain.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Histogram};
use crate::error::{Error, Result};
use crate::predictor::TieStrategy;

/// Gains closer than this are treated as equal when choosing a split.
const GAIN_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Internal {
        split_attribute: usize,
        children: BTreeMap<String, NodeId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    id: NodeId,
    parent: Option<NodeId>,
    kind: NodeKind,
    indices: Vec<usize>,
    tally: Histogram,
    resolved_label: Option<String>,
}

impl TreeNode {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }

    /// Sorted training row indices reaching this node.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn tally(&self) -> &Histogram {
        &self.tally
    }

    pub fn resolved_label(&self) -> Option<&str> {
        self.resolved_label.as_deref()
    }

    pub fn split_attribute(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Internal { split_attribute, .. } => Some(split_attribute),
            NodeKind::Leaf => None,
        }
    }

    pub fn child(&self, value: &str) -> Option<NodeId> {
        match &self.kind {
            NodeKind::Internal { children, .. } => children.get(value).copied(),
            NodeKind::Leaf => None,
        }
    }

    pub fn children(&self) -> impl Iterator<Item = (&str, NodeId)> + '_ {
        let children = match &self.kind {
            NodeKind::Internal { children, .. } => Some(children),
            NodeKind::Leaf => None,
        };
        children
            .into_iter()
            .flat_map(|c| c.iter().map(|(v, &id)| (v.as_str(), id)))
    }
}

/// How a tree's resolved labels were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub strategy: TieStrategy,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    root: NodeId,
    nodes: Vec<TreeNode>,
    attribute_names: Vec<String>,
    outcome_name: String,
    outcome_domain: BTreeSet<String>,
    annotation: Option<Annotation>,
}

impl Tree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Result<&TreeNode> {
        self.nodes.get(id.0).ok_or(Error::UnknownNode(id))
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> + '_ {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn outcome_name(&self) -> &str {
        &self.outcome_name
    }

    pub fn outcome_domain(&self) -> &BTreeSet<String> {
        &self.outcome_domain
    }

    pub fn annotation(&self) -> Option<Annotation> {
        self.annotation
    }

    /// Parent, grandparent, ... up to and including the root. Empty for the
    /// root itself.
    pub fn ancestor_chain(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let mut chain = Vec::new();
        let mut current = self.node(id)?.parent;
        while let Some(parent) = current {
            chain.push(parent);
            current = self.node(parent)?.parent;
        }
        Ok(chain)
    }

    pub fn depth(&self, id: NodeId) -> Result<usize> {
        self.ancestor_chain(id).map(|c| c.len())
    }

    /// The `(attribute name, value)` branch tests on the way from the root
    /// down to `id`, root-first.
    pub fn path_constraints(&self, id: NodeId) -> Result<Vec<(String, String)>> {
        let mut constraints = Vec::new();
        let mut current = self.node(id)?;
        while let Some(parent_id) = current.parent {
            let parent = self.node(parent_id)?;
            let (attribute, value) = match &parent.kind {
                NodeKind::Internal { split_attribute, children } => {
                    let value = children
                        .iter()
                        .find(|&(_, &c)| c == current.id)
                        .map(|(v, _)| v.clone())
                        .ok_or_else(|| Error::InvalidModel(format!("{} is not a child of its parent", current.id)))?;
                    (*split_attribute, value)
                }
                NodeKind::Leaf => return Err(Error::InvalidModel(format!("{parent_id} is a leaf with children"))),
            };
            constraints.push((self.attribute_names[attribute].clone(), value));
            current = parent;
        }
        constraints.reverse();
        Ok(constraints)
    }

    pub(crate) fn set_resolved_label(&mut self, id: NodeId, label: String) {
        self.nodes[id.0].resolved_label = Some(label);
    }

    pub(crate) fn set_annotation(&mut self, annotation: Annotation) {
        self.annotation = Some(annotation);
    }
}

/// Shannon entropy of a tally, in bits.
pub fn entropy(tally: &Histogram) -> Result<f64> {
    let total = tally.total();
    if total == 0 {
        return Err(Error::EmptyTally);
    }
    let total = total as f64;
    Ok(tally
        .iter()
        .map(|(_, count)| {
            let p = count as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

/// Entropy of `node_tally` minus the count-weighted entropy of its blocks.
/// Empty blocks contribute nothing.
pub fn information_gain(node_tally: &Histogram, partition: &[Histogram]) -> Result<f64> {
    let expected = node_tally.total();
    let found: usize = partition.iter().map(Histogram::total).sum();
    if expected != found {
        return Err(Error::PartitionMismatch { expected, found });
    }
    let parent = entropy(node_tally)?;
    let mut weighted = 0.0;
    for block in partition.iter().filter(|b| !b.is_empty()) {
        weighted += block.total() as f64 / expected as f64 * entropy(block)?;
    }
    Ok(parent - weighted)
}

/// Grows an unpruned ID3 tree with multiway splits.
///
/// A node becomes a leaf when its tally is pure or every attribute has
/// already been used on its path. Otherwise it splits on the unused
/// attribute of highest information gain, lowest attribute index winning
/// ties, with one child per value present among the node's rows.
pub fn build_tree(dataset: &Dataset) -> Tree {
    let attribute_count = dataset.attribute_names().len();
    let all: Vec<usize> = (0..dataset.len()).collect();
    let mut nodes = vec![new_node(dataset, NodeId(0), None, all)];
    let mut queue = VecDeque::from([(NodeId(0), vec![false; attribute_count])]);

    while let Some((id, used)) = queue.pop_front() {
        let node = &nodes[id.0];
        if node.tally.len() <= 1 || used.iter().all(|&u| u) {
            continue;
        }

        let mut best: Option<(usize, f64, BTreeMap<String, Vec<usize>>)> = None;
        for attribute in (0..attribute_count).filter(|&a| !used[a]) {
            let blocks = partition_by(dataset, &node.indices, attribute);
            let tallies: Vec<Histogram> = blocks.values().map(|rows| tally_of(dataset, rows)).collect();
            let gain = information_gain(&node.tally, &tallies).expect("blocks partition the node");
            if best.as_ref().is_none_or(|(_, g, _)| gain > g + GAIN_EPSILON) {
                best = Some((attribute, gain, blocks));
            }
        }
        let (attribute, _, blocks) = best.expect("at least one unused attribute");

        let mut children = BTreeMap::new();
        let mut child_used = used;
        child_used[attribute] = true;
        for (value, rows) in blocks {
            let child = NodeId(nodes.len());
            nodes.push(new_node(dataset, child, Some(id), rows));
            children.insert(value, child);
            queue.push_back((child, child_used.clone()));
        }
        nodes[id.0].kind = NodeKind::Internal { split_attribute: attribute, children };
    }

    let outcome_domain = nodes[0].tally.outcomes().map(str::to_owned).collect();
    Tree {
        root: NodeId(0),
        nodes,
        attribute_names: dataset.attribute_names().to_vec(),
        outcome_name: dataset.outcome_name().to_owned(),
        outcome_domain,
        annotation: None,
    }
}

fn new_node(dataset: &Dataset, id: NodeId, parent: Option<NodeId>, indices: Vec<usize>) -> TreeNode {
    let tally = tally_of(dataset, &indices);
    TreeNode { id, parent, kind: NodeKind::Leaf, indices, tally, resolved_label: None }
}

fn tally_of(dataset: &Dataset, rows: &[usize]) -> Histogram {
    dataset.histogram(rows.iter().copied()).expect("node rows index the dataset")
}

fn partition_by(dataset: &Dataset, rows: &[usize], attribute: usize) -> BTreeMap<String, Vec<usize>> {
    let mut blocks: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &i in rows {
        let value = dataset.rows()[i].value(attribute);
        match blocks.get_mut(value) {
            Some(block) => block.push(i),
            None => {
                blocks.insert(value.to_owned(), vec![i]);
            }
        }
    }
    blocks
}

// ---------------------------------------------------------------------------
// JSON model format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDocument {
    attribute_names: Vec<String>,
    outcome_name: String,
    outcome_domain: BTreeSet<String>,
    root: NodeId,
    annotation: Option<Annotation>,
    nodes: Vec<NodeDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDocument {
    id: NodeId,
    parent: Option<NodeId>,
    split_attribute: Option<String>,
    children: BTreeMap<String, NodeId>,
    tally: Histogram,
    indices: Vec<usize>,
    resolved_label: Option<String>,
}

impl Tree {
    /// Pretty-printed JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        let doc = TreeDocument {
            attribute_names: self.attribute_names.clone(),
            outcome_name: self.outcome_name.clone(),
            outcome_domain: self.outcome_domain.clone(),
            root: self.root,
            annotation: self.annotation,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDocument {
                    id: n.id,
                    parent: n.parent,
                    split_attribute: n.split_attribute().map(|a| self.attribute_names[a].clone()),
                    children: n.children().map(|(v, id)| (v.to_owned(), id)).collect(),
                    tally: n.tally.clone(),
                    indices: n.indices.clone(),
                    resolved_label: n.resolved_label.clone(),
                })
                .collect(),
        };
        crate::to_sorted_json(&doc)
    }

    /// Parses and structurally validates a model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeDocument = serde_json::from_str(text)?;
        let invalid = |msg: String| Err(Error::InvalidModel(msg));

        let n = doc.nodes.len();
        if n == 0 {
            return invalid("no nodes".into());
        }
        if doc.root.0 >= n {
            return invalid(format!("root {} out of range", doc.root));
        }
        let mut nodes = Vec::with_capacity(n);
        for (position, nd) in doc.nodes.into_iter().enumerate() {
            if nd.id.0 != position {
                return invalid(format!("node at position {position} has id {}", nd.id));
            }
            if nd.indices.windows(2).any(|w| w[0] >= w[1]) {
                return invalid(format!("indices of {} are not strictly increasing", nd.id));
            }
            if nd.indices.is_empty() {
                return invalid(format!("{} has no rows", nd.id));
            }
            if nd.tally.total() != nd.indices.len() {
                return invalid(format!("tally total of {} differs from its row count", nd.id));
            }
            let kind = match nd.split_attribute {
                None if nd.children.is_empty() => NodeKind::Leaf,
                None => return invalid(format!("{} has children but no split attribute", nd.id)),
                Some(_) if nd.children.is_empty() => {
                    return invalid(format!("{} has a split attribute but no children", nd.id))
                }
                Some(name) => match doc.attribute_names.iter().position(|a| *a == name) {
                    Some(split_attribute) => NodeKind::Internal { split_attribute, children: nd.children },
                    None => return invalid(format!("{} splits on unknown attribute {name:?}", nd.id)),
                },
            };
            nodes.push(TreeNode {
                id: nd.id,
                parent: nd.parent,
                kind,
                indices: nd.indices,
                tally: nd.tally,
                resolved_label: nd.resolved_label,
            });
        }

        if nodes[doc.root.0].parent.is_some() {
            return invalid("root has a parent".into());
        }
        let mut seen = vec![false; n];
        seen[doc.root.0] = true;
        let mut queue = VecDeque::from([doc.root]);
        while let Some(id) = queue.pop_front() {
            let node = &nodes[id.0];
            let mut covered = Vec::new();
            let mut summed = Histogram::new();
            for (_, child) in node.children() {
                if child.0 >= n || seen[child.0] {
                    return invalid(format!("{child} is out of range or has two parents"));
                }
                let c = &nodes[child.0];
                if c.parent != Some(id) {
                    return invalid(format!("{child} does not name {id} as its parent"));
                }
                seen[child.0] = true;
                covered.extend_from_slice(&c.indices);
                summed = &summed + &c.tally;
                queue.push_back(child);
            }
            if !node.is_leaf() {
                covered.sort_unstable();
                if covered != node.indices || summed != node.tally {
                    return invalid(format!("children of {id} do not partition its rows"));
                }
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return invalid(format!("{} is unreachable from the root", NodeId(orphan)));
        }
        let root_outcomes: BTreeSet<String> = nodes[doc.root.0].tally.outcomes().map(str::to_owned).collect();
        if root_outcomes != doc.outcome_domain {
            return invalid("outcome domain differs from the root tally".into());
        }

        Ok(Tree {
            root: doc.root,
            nodes,
            attribute_names: doc.attribute_names,
            outcome_name: doc.outcome_name,
            outcome_domain: doc.outcome_domain,
            annotation: doc.annotation,
        })
    }
}
