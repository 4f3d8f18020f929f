// Loads a CSV, trains an annotated model, saves it as JSON, reloads it and
// answers a few queries, including one with a value the tree never saw.
//
//     cargo run --example train_and_predict

use std::error::Error;
use std::fs::File;

use backtrack_tree::{annotate_labels, build_tree, predict_seeded, Dataset, Query, TieStrategy, Tree};

fn main() -> Result<(), Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.csv");
    let dataset = Dataset::load_csv(File::open(path)?, "Outcome")?;

    let seed = 17;
    let model = annotate_labels(build_tree(&dataset), TieStrategy::Backtrack, seed);
    let saved = std::env::temp_dir().join("backtrack-tree-example-model.json");
    std::fs::write(&saved, model.to_json())?;
    let model = Tree::from_json(&std::fs::read_to_string(&saved)?)?;
    println!("model with {} nodes written to {}", model.len(), saved.display());

    for leaf in model.leaves() {
        println!("  leaf {} -> {}", leaf.id(), leaf.resolved_label().unwrap_or("?"));
    }

    for text in ["Attr A=a0,Attr B=b1", "Attr A=a1,Attr B=b1", "Attr A=a1,Attr B=b7"] {
        let p = predict_seeded(&model, &Query::parse(text)?, TieStrategy::Backtrack, seed)?;
        println!("{text:<22} -> {} (stopped at {}, {} steps)", p.label, p.leaf, p.steps.len());
    }
    Ok(())
}
