//! Cross-validated accuracy and paired comparison of tie strategies.
//!
//! Every strategy is scored on the same folds and the same trees, so any
//! accuracy difference comes from tie resolution alone. Random draws come
//! from a stream per (fold, row, strategy), so adding or removing a
//! strategy never shifts another strategy's picks.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::induction::{build_tree, Tree};
use crate::predictor::{max_candidates, resolve, route, Query, TieStrategy};
use crate::rng;

const FOLD_STREAM: u64 = 0xF01D;
const GENERATOR_STREAM: u64 = 0x6E4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMethod {
    LeaveOneOut,
    KFold(usize),
}

impl fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalMethod::LeaveOneOut => f.write_str("leave-one-out"),
            EvalMethod::KFold(k) => write!(f, "{k}-fold"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyStats {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Predictions whose reached node had two or more top outcomes.
    pub ties: usize,
    pub tie_rate: f64,
    /// Predictions whose final pick was random.
    pub randomized: usize,
    pub randomized_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedComparison {
    pub backtrack_wins: usize,
    pub random_wins: usize,
    pub both_correct: usize,
    pub both_wrong: usize,
    pub sign_test_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub method: String,
    pub seed: u64,
    pub rows: usize,
    /// Held-out row indices per fold, sorted.
    pub folds: Vec<Vec<usize>>,
    pub per_strategy: BTreeMap<TieStrategy, StrategyStats>,
    /// Present when both strategies were evaluated.
    pub paired: Option<PairedComparison>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        crate::to_sorted_json(self)
    }

    /// Aligned plain-text summary.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method: {}  seed: {}  rows: {}  folds: {}", self.method, self.seed, self.rows, self.folds.len());
        let _ = writeln!(
            out,
            "{:<10} {:>9} {:>8} {:>6} {:>9} {:>16}",
            "strategy", "accuracy", "correct", "total", "tie_rate", "randomized_rate"
        );
        for (strategy, s) in &self.per_strategy {
            let _ = writeln!(
                out,
                "{:<10} {:>9.6} {:>8} {:>6} {:>9.4} {:>16.4}",
                strategy.as_str(),
                s.accuracy,
                s.correct,
                s.total,
                s.tie_rate,
                s.randomized_rate
            );
        }
        if let Some(p) = &self.paired {
            let _ = writeln!(
                out,
                "paired: backtrack_wins={} random_wins={} both_correct={} both_wrong={} sign_test_p={:.6}",
                p.backtrack_wins, p.random_wins, p.both_correct, p.both_wrong, p.sign_test_p
            );
        }
        out
    }
}

/// Held-out row sets for each fold. Folds are stratified by outcome when
/// every outcome has at least `k` rows, otherwise dealt from one shuffle.
pub fn make_folds(dataset: &Dataset, method: EvalMethod, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::TooFewRows { rows: n });
    }
    let k = match method {
        EvalMethod::LeaveOneOut => return Ok((0..n).map(|i| vec![i]).collect()),
        EvalMethod::KFold(k) if (2..=n).contains(&k) => k,
        EvalMethod::KFold(k) => return Err(Error::InvalidFoldCount { k, rows: n }),
    };

    let mut by_outcome: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for row in dataset.rows() {
        by_outcome.entry(row.outcome.as_str()).or_default().push(row.index);
    }
    let groups: Vec<Vec<usize>> = if by_outcome.values().all(|g| g.len() >= k) {
        by_outcome.into_values().collect()
    } else {
        vec![(0..n).collect()]
    };

    let mut folds = vec![Vec::new(); k];
    let mut position = 0;
    for (g, mut group) in groups.into_iter().enumerate() {
        group.shuffle(&mut rng::stream(seed, &[FOLD_STREAM, g as u64]));
        for index in group {
            folds[position % k].push(index);
            position += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Default)]
struct Tallies {
    correct: usize,
    total: usize,
    ties: usize,
    randomized: usize,
}

impl Tallies {
    fn finish(&self) -> StrategyStats {
        let rate = |x: usize| if self.total == 0 { 0.0 } else { x as f64 / self.total as f64 };
        StrategyStats {
            accuracy: rate(self.correct),
            correct: self.correct,
            total: self.total,
            ties: self.ties,
            tie_rate: rate(self.ties),
            randomized: self.randomized,
            randomized_rate: rate(self.randomized),
        }
    }
}

/// Cross-validates every strategy in `strategies` on shared folds and trees.
pub fn evaluate(dataset: &Dataset, method: EvalMethod, strategies: &[TieStrategy], seed: u64) -> Result<EvalReport> {
    if strategies.is_empty() {
        return Err(Error::InvalidParameter("no tie strategies to evaluate".into()));
    }
    let mut strategies = strategies.to_vec();
    strategies.sort_unstable();
    strategies.dedup();

    let folds = make_folds(dataset, method, seed)?;
    let mut tallies: BTreeMap<TieStrategy, Tallies> = strategies.iter().map(|&s| (s, Tallies::default())).collect();
    // Per held-out row: correctness under (backtrack, random), when both run.
    let mut pairs: Vec<(bool, bool)> = Vec::new();

    for (f, held_out) in folds.iter().enumerate() {
        let mut is_held_out = vec![false; dataset.len()];
        for &i in held_out {
            is_held_out[i] = true;
        }
        let train: Vec<usize> = (0..dataset.len()).filter(|&i| !is_held_out[i]).collect();
        let tree = build_tree(&dataset.subset(&train)?);

        for &i in held_out {
            let row = dataset.row(i)?;
            let node = route(&tree, &Query::from_row(dataset.attribute_names(), row))?;
            let mut outcomes = BTreeMap::new();
            for &strategy in &strategies {
                let mut stream = rng::stream(seed, &[f as u64, i as u64, strategy.stream_tag()]);
                let prediction = resolve(&tree, node, strategy, &mut stream)?;
                let correct = prediction.label == row.outcome;
                let t = tallies.get_mut(&strategy).expect("strategy registered");
                t.total += 1;
                t.correct += usize::from(correct);
                t.ties += usize::from(prediction.was_tied());
                t.randomized += usize::from(prediction.randomized);
                outcomes.insert(strategy, correct);
            }
            if let (Some(&b), Some(&r)) = (outcomes.get(&TieStrategy::Backtrack), outcomes.get(&TieStrategy::Random)) {
                pairs.push((b, r));
            }
        }
    }

    let paired = (tallies.len() == 2).then(|| {
        let backtrack_wins = pairs.iter().filter(|&&(b, r)| b && !r).count();
        let random_wins = pairs.iter().filter(|&&(b, r)| !b && r).count();
        PairedComparison {
            backtrack_wins,
            random_wins,
            both_correct: pairs.iter().filter(|&&(b, r)| b && r).count(),
            both_wrong: pairs.iter().filter(|&&(b, r)| !b && !r).count(),
            sign_test_p: sign_test(backtrack_wins, random_wins).unwrap_or(1.0),
        }
    });

    Ok(EvalReport {
        method: method.to_string(),
        seed,
        rows: dataset.len(),
        folds,
        per_strategy: tallies.iter().map(|(&s, t)| (s, t.finish())).collect(),
        paired,
    })
}

/// Two-sided exact binomial sign test on discordant pair counts.
pub fn sign_test(wins_a: usize, wins_b: usize) -> Result<f64> {
    let n = wins_a + wins_b;
    if n == 0 {
        return Err(Error::NoDiscordantPairs);
    }
    let k = wins_a.min(wins_b);
    // Tail terms relative to the largest one, C(n, i) / C(n, k) for i <= k.
    let mut ratio = 1.0;
    let mut relative_tail = 1.0;
    for i in (1..=k).rev() {
        ratio *= i as f64 / (n - i + 1) as f64;
        relative_tail += ratio;
    }
    // log2(C(n, k) / 2^n)
    let log2_peak: f64 = (1..=k).map(|j| ((n - k + j) as f64 / j as f64).log2()).sum::<f64>() - n as f64;
    Ok((2.0 * relative_tail * log2_peak.exp2()).min(1.0))
}

/// Fraction of leaves whose tally has more than one top outcome.
pub fn leaf_tie_rate(tree: &Tree) -> f64 {
    let leaves: Vec<_> = tree.leaves().collect();
    let tied = leaves
        .iter()
        .filter(|l| max_candidates(l.tally(), None).is_ok_and(|c| c.len() > 1))
        .count();
    tied as f64 / leaves.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TieHeavyParams {
    pub num_rows: usize,
    pub num_attributes: usize,
    pub values_per_attribute: usize,
    pub num_outcomes: usize,
    /// Probability that a freshly drawn row is followed by a twin with the
    /// same attribute profile and a different outcome.
    pub tie_bias: f64,
}

/// Synthetic categorical data with a controllable rate of conflicting twins.
///
/// Fresh rows draw a uniform attribute profile and take an outcome
/// determined by their first two attribute values. Twins copy the
/// preceding fresh row's profile with another outcome, which leaves
/// balanced tallies behind in the induced tree.
pub fn generate_tie_heavy(params: TieHeavyParams, seed: u64) -> Result<Dataset> {
    let TieHeavyParams { num_rows, num_attributes, values_per_attribute, num_outcomes, tie_bias } = params;
    if num_rows == 0 || num_attributes == 0 || values_per_attribute == 0 || num_outcomes == 0 {
        return Err(Error::InvalidParameter("row, attribute, value and outcome counts must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&tie_bias) {
        return Err(Error::InvalidParameter(format!("tie_bias {tie_bias} is outside [0, 1]")));
    }
    if tie_bias > 0.0 && num_outcomes < 2 {
        return Err(Error::InvalidParameter("conflicting twins need at least 2 outcomes".into()));
    }

    let mut rng = rng::stream(seed, &[GENERATOR_STREAM]);
    let base_outcome = |profile: &[usize]| profile.iter().take(2).sum::<usize>() % num_outcomes;
    let mut records: Vec<(Vec<usize>, usize)> = Vec::with_capacity(num_rows);
    let mut last_was_fresh = false;
    while records.len() < num_rows {
        if last_was_fresh && rng.random_bool(tie_bias) {
            let (profile, outcome) = records.last().cloned().expect("a fresh row precedes");
            let other = (outcome + 1 + rng.random_range(0..num_outcomes - 1)) % num_outcomes;
            records.push((profile, other));
            last_was_fresh = false;
        } else {
            let profile: Vec<usize> = (0..num_attributes).map(|_| rng.random_range(0..values_per_attribute)).collect();
            let outcome = base_outcome(&profile);
            records.push((profile, outcome));
            last_was_fresh = true;
        }
    }

    let names = (0..num_attributes).map(|a| format!("attr{a}")).collect();
    let records = records.into_iter().map(|(profile, outcome)| {
        (profile.into_iter().map(|v| format!("v{v}")).collect(), format!("c{outcome}"))
    });
    Dataset::new(names, "class", records)
}
