// Cross-checks tree-based backtrack resolution against the brute-force
// oracle on a batch of random datasets.
//
//     cargo run --example oracle_check

use backtrack_tree::{build_tree, rng, verify_tree, Dataset};
use rand::Rng;

fn random_dataset(seed: u64) -> Dataset {
    let mut r = rng::stream(seed, &[]);
    let (attributes, values, rows, outcomes) =
        (r.random_range(1..=5), r.random_range(2..=4), r.random_range(5..=120), r.random_range(2..=5));
    let names = (0..attributes).map(|a| format!("A{a}")).collect();
    let records: Vec<_> = (0..rows)
        .map(|_| {
            let row = (0..attributes).map(|_| format!("v{}", r.random_range(0..values))).collect();
            (row, format!("o{}", r.random_range(0..outcomes)))
        })
        .collect();
    Dataset::new(names, "Y", records).unwrap()
}

fn main() {
    let (mut leaves, mut randomized, mut failures) = (0, 0, 0);
    for seed in 0..200 {
        let data = random_dataset(seed);
        let tree = build_tree(&data);
        for check in verify_tree(&data, &tree, seed).unwrap() {
            leaves += 1;
            randomized += usize::from(check.tree.randomized);
            if !check.passed {
                failures += 1;
                eprintln!("seed {seed}: leaf {} disagrees: {:?} vs {:?}", check.leaf, check.tree, check.oracle);
            }
        }
    }
    println!("{leaves} leaves checked, {randomized} fell back to random, {failures} disagreements");
    assert_eq!(failures, 0);
}
