// Grows the tree for the built-in eight-row table, prints each node's
// tally and walks the two tied leaves up their ancestor chains.
//
//     cargo run --example table_walkthrough

use backtrack_tree::{build_tree, predict, rng, Dataset, Query, TieStrategy};

fn main() {
    let dataset = Dataset::builtin_table1();
    let tree = build_tree(&dataset);

    for node in tree.nodes() {
        let split = node
            .split_attribute()
            .map(|a| format!("split on {}", tree.attribute_names()[a]))
            .unwrap_or_else(|| "leaf".into());
        println!("{} {:<18} rows {:?} tally {}", node.id(), split, node.indices(), node.tally());
    }

    for (a, b) in [("a0", "b0"), ("a1", "b0")] {
        let query = Query::new().with("Attr A", a).with("Attr B", b);
        let p = predict(&tree, &query, TieStrategy::Backtrack, &mut rng::stream(0, &[])).unwrap();
        println!("\nquery Attr A={a}, Attr B={b} -> {}", p.label);
        for step in &p.steps {
            println!("  at {}: counts {:?} -> tied {:?}", step.node, step.counts, step.candidates);
        }
    }
}
