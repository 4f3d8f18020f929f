#![allow(dead_code)]

use backtrack_tree::rng;
use backtrack_tree::Dataset;
use proptest::prelude::*;
use rand::Rng;

/// Bounds for randomly generated categorical datasets.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub attributes: usize,
    pub values: usize,
    pub rows: usize,
    pub outcomes: usize,
}

/// A dataset drawn from `seed`, with every size uniform in `1..=bound`.
pub fn random_dataset(bound: Shape, seed: u64) -> Dataset {
    let mut r = rng::stream(seed, &[0xDA7A]);
    let shape = Shape {
        attributes: r.random_range(1..=bound.attributes),
        values: r.random_range(1..=bound.values),
        rows: r.random_range(1..=bound.rows),
        outcomes: r.random_range(1..=bound.outcomes),
    };
    dataset_of_shape(shape, &mut r)
}

pub fn dataset_of_shape<R: Rng>(shape: Shape, r: &mut R) -> Dataset {
    let names = (0..shape.attributes).map(|a| format!("A{a}")).collect();
    let records: Vec<(Vec<String>, String)> = (0..shape.rows)
        .map(|_| {
            let values = (0..shape.attributes)
                .map(|_| format!("v{}", r.random_range(0..shape.values)))
                .collect();
            (values, format!("o{}", r.random_range(0..shape.outcomes)))
        })
        .collect();
    Dataset::new(names, "Y", records).expect("generated dataset is well formed")
}

pub const LIMITS: Shape = Shape { attributes: 6, values: 4, rows: 200, outcomes: 6 };

pub fn arb_dataset() -> impl Strategy<Value = Dataset> {
    any::<u64>().prop_map(|seed| random_dataset(LIMITS, seed))
}

pub mod props {
    //! Invariant checks shared by the property suite and the acceptance run.

    use std::collections::{BTreeMap, BTreeSet};

    use backtrack_tree::evaluation::leaf_tie_rate;
    use backtrack_tree::induction::NodeId;
    use backtrack_tree::{
        annotate_labels, build_tree, entropy, information_gain, max_candidates, oracle_predict, predict_seeded,
        resolve_backtrack, resolve_random, rng, Dataset, Histogram, Query, TieStrategy, Tree,
    };
    use proptest::prelude::*;

    pub fn count_conservation(d: &Dataset) -> Result<(), TestCaseError> {
        let tree = build_tree(d);
        let root = tree.node(tree.root()).unwrap();
        prop_assert_eq!(root.tally(), &d.histogram(0..d.len()).unwrap());
        prop_assert_eq!(root.indices().len(), d.len());
        for node in tree.nodes() {
            prop_assert!(!node.indices().is_empty());
            prop_assert_eq!(node.tally(), &d.histogram(node.indices().iter().copied()).unwrap());
            if node.is_leaf() {
                continue;
            }
            let kids: Vec<_> = node.children().map(|(_, c)| tree.node(c).unwrap()).collect();
            let summed: Histogram = kids.iter().map(|k| k.tally()).sum();
            prop_assert_eq!(&summed, node.tally());
            let mut rows: Vec<usize> = kids.iter().flat_map(|k| k.indices().iter().copied()).collect();
            rows.sort_unstable();
            prop_assert_eq!(rows.as_slice(), node.indices());
            for k in &kids {
                prop_assert_eq!(k.parent(), Some(node.id()));
            }
        }
        Ok(())
    }

    pub fn path_structure(d: &Dataset) -> Result<(), TestCaseError> {
        let tree = build_tree(d);
        for node in tree.nodes() {
            let path = tree.path_constraints(node.id()).unwrap();
            prop_assert!(path.len() <= d.attribute_names().len());
            let distinct: BTreeSet<&String> = path.iter().map(|(a, _)| a).collect();
            prop_assert_eq!(distinct.len(), path.len());
            for &i in node.indices() {
                let row = d.row(i).unwrap();
                for (a, v) in &path {
                    prop_assert_eq!(row.value(d.attribute_index(a).unwrap()), v.as_str());
                }
            }
        }
        Ok(())
    }

    /// Checks the walk invariants of one backtrack prediction.
    pub fn walk_invariants(tree: &Tree, leaf: NodeId, seed: u64) -> Result<(), TestCaseError> {
        let p = resolve_backtrack(tree, leaf, &mut rng::stream(seed, &[])).unwrap();
        prop_assert_eq!(p.steps[0].node, leaf);
        let leaf_max = max_candidates(tree.node(leaf).unwrap().tally(), None).unwrap();
        prop_assert!(leaf_max.contains(&p.label));
        prop_assert!(p.final_candidates().contains(&p.label));
        for pair in p.steps.windows(2) {
            prop_assert_eq!(tree.node(pair[0].node).unwrap().parent(), Some(pair[1].node));
            let prev: BTreeSet<&String> = pair[0].candidates.iter().collect();
            let next: BTreeSet<&String> = pair[1].candidates.iter().collect();
            prop_assert!(!next.is_empty());
            prop_assert!(next.is_subset(&prev));
            prop_assert_eq!(pair[1].counts.keys().collect::<BTreeSet<_>>(), prev.clone());
            for (outcome, &count) in &pair[1].counts {
                prop_assert!(count >= pair[0].counts[outcome], "count of {} shrank", outcome);
            }
        }
        if !p.randomized {
            prop_assert_eq!(p.final_candidates().len(), 1);
            let other = resolve_backtrack(tree, leaf, &mut rng::stream(seed ^ 0xFFFF, &[])).unwrap();
            prop_assert_eq!(other, p.clone());
        } else {
            prop_assert_eq!(p.steps.last().unwrap().node, tree.root());
            prop_assert!(p.final_candidates().len() > 1);
        }
        if leaf_max.len() == 1 {
            let r = resolve_random(tree, leaf, &mut rng::stream(seed, &[])).unwrap();
            prop_assert_eq!(&r.label, &p.label);
            prop_assert!(!r.randomized && !p.randomized);
        }
        Ok(())
    }

    pub fn all_walks(d: &Dataset, seed: u64) -> Result<(), TestCaseError> {
        let tree = build_tree(d);
        for node in tree.nodes() {
            walk_invariants(&tree, node.id(), seed)?;
        }
        Ok(())
    }

    /// Backtracking with explicit accumulation: each candidate's score is the
    /// sum of its counts over the nodes visited so far.
    pub fn accumulating_label(tree: &Tree, leaf: NodeId) -> (BTreeSet<String>, bool) {
        let mut chain = vec![leaf];
        chain.extend(tree.ancestor_chain(leaf).unwrap());
        let mut candidates: BTreeSet<String> = tree.node(leaf).unwrap().tally().outcomes().map(str::to_owned).collect();
        let mut sums: BTreeMap<String, usize> = BTreeMap::new();
        for id in chain {
            let tally = tree.node(id).unwrap().tally();
            for o in &candidates {
                *sums.entry(o.clone()).or_insert(0) += tally.count(o);
            }
            let best = candidates.iter().map(|o| sums[o]).max().unwrap();
            candidates.retain(|o| sums[o] == best);
            if candidates.len() == 1 {
                return (candidates, false);
            }
        }
        (candidates, true)
    }

    pub fn accumulation_equivalence(d: &Dataset) -> Result<(), TestCaseError> {
        let tree = build_tree(d);
        for node in tree.nodes() {
            let p = resolve_backtrack(&tree, node.id(), &mut rng::stream(0, &[])).unwrap();
            let (candidates, randomized) = accumulating_label(&tree, node.id());
            prop_assert_eq!(randomized, p.randomized);
            let got: BTreeSet<String> = p.final_candidates().iter().cloned().collect();
            prop_assert_eq!(got, candidates);
        }
        Ok(())
    }

    pub fn split_numerics(d: &Dataset) -> Result<(), TestCaseError> {
        let tree = build_tree(d);
        for node in tree.nodes() {
            let h = entropy(node.tally()).unwrap();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (node.tally().len() as f64).log2() + 1e-12);
            if node.is_leaf() {
                continue;
            }
            for attribute in 0..d.attribute_names().len() {
                let mut blocks: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
                for &i in node.indices() {
                    blocks.entry(d.row(i).unwrap().value(attribute)).or_default().push(i);
                }
                let partition: Vec<Histogram> =
                    blocks.values().map(|rows| d.histogram(rows.iter().copied()).unwrap()).collect();
                let gain = information_gain(node.tally(), &partition).unwrap();
                prop_assert!(gain >= -1e-12, "negative gain {}", gain);
            }
        }
        Ok(())
    }

    pub fn build_determinism(d: &Dataset) -> Result<(), TestCaseError> {
        let a = build_tree(d);
        let b = build_tree(d);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.to_json(), b.to_json());
        Ok(())
    }

    pub fn oracle_equivalence(d: &Dataset, seed: u64) -> Result<usize, TestCaseError> {
        let tree = build_tree(d);
        let mut checked = 0;
        for leaf in tree.leaves() {
            let p = resolve_backtrack(&tree, leaf.id(), &mut rng::stream(seed, &[])).unwrap();
            let constraints = tree.path_constraints(leaf.id()).unwrap();
            let v = oracle_predict(d, &constraints, &mut rng::stream(seed, &[])).unwrap();
            prop_assert_eq!(p.randomized, v.randomized);
            if p.randomized {
                prop_assert_eq!(p.final_candidates(), v.candidates.as_slice());
            } else {
                prop_assert_eq!(&p.label, &v.label);
            }
            checked += 1;
        }
        Ok(checked)
    }

    pub fn annotation_agreement(d: &Dataset, seed: u64) -> Result<(), TestCaseError> {
        for strategy in TieStrategy::ALL {
            let tree = annotate_labels(build_tree(d), strategy, seed);
            for row in d.rows() {
                let q = Query::from_row(d.attribute_names(), row);
                let p = predict_seeded(&tree, &q, strategy, seed).unwrap();
                prop_assert_eq!(Some(p.label.as_str()), tree.node(p.leaf).unwrap().resolved_label());
            }
        }
        Ok(())
    }

    pub fn model_round_trip(d: &Dataset, seed: u64) -> Result<(), TestCaseError> {
        let tree = annotate_labels(build_tree(d), TieStrategy::Backtrack, seed);
        let text = tree.to_json();
        let back = Tree::from_json(&text).unwrap();
        prop_assert_eq!(&back, &tree);
        prop_assert_eq!(back.to_json(), text);
        let rate = leaf_tie_rate(&tree);
        prop_assert!((0.0..=1.0).contains(&rate));
        Ok(())
    }

    pub fn csv_round_trip(d: &Dataset) -> Result<(), TestCaseError> {
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Dataset::load_csv(buf.as_slice(), d.outcome_name()).unwrap();
        prop_assert_eq!(&back, d);
        Ok(())
    }
}
