// Paired 5-fold comparison of backtrack and random tie-breaking on
// synthetic data with many conflicting duplicate rows.
//
//     cargo run --release --example compare_strategies

use backtrack_tree::evaluation::{evaluate, generate_tie_heavy, EvalMethod, TieHeavyParams};
use backtrack_tree::TieStrategy;

fn main() {
    let params = TieHeavyParams {
        num_rows: 1_000,
        num_attributes: 4,
        values_per_attribute: 3,
        num_outcomes: 3,
        tie_bias: 0.5,
    };
    for seed in 0..3 {
        let data = generate_tie_heavy(params, seed).expect("valid parameters");
        let report = evaluate(&data, EvalMethod::KFold(5), &TieStrategy::ALL, seed).expect("evaluation");
        println!("{}", report.render_table());
    }
}
