//! Command-line front end: `train`, `predict`, `evaluate`, `compare` and
//! `verify`.
//!
//! Exit codes are 0 on success, 1 on usage or validation errors and 2 when
//! `verify` finds a disagreement with the oracle.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvalMethod};
use crate::induction::{build_tree, Tree};
use crate::oracle::verify_tree;
use crate::predictor::{annotate_labels, predict_seeded, Query, TieStrategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "backtrack-tree", version, about = "Decision trees with backtrack tie-breaking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a tree from a CSV file, resolve leaf labels and write the model.
    Train(TrainArgs),
    /// Predict labels for queries with a trained model.
    Predict(PredictArgs),
    /// Cross-validate one tie strategy.
    Evaluate(EvaluateArgs),
    /// Cross-validate both tie strategies on paired folds.
    Compare(CompareArgs),
    /// Check backtrack resolution against the brute-force oracle on every leaf.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Backtrack,
    Random,
}

impl From<StrategyArg> for TieStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Backtrack => TieStrategy::Backtrack,
            StrategyArg::Random => TieStrategy::Random,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Loo,
    Kfold,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "outcome-col")]
    outcome_col: String,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "tie-strategy", value_enum, default_value = "backtrack")]
    tie_strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated `name=value` pairs.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    query: Option<String>,
    /// CSV of queries; columns not consulted by the tree are ignored.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Print the JSON prediction with its backtrack steps.
    #[arg(long)]
    trace: bool,
    /// Defaults to the strategy the model was annotated with.
    #[arg(long = "tie-strategy", value_enum)]
    tie_strategy: Option<StrategyArg>,
    /// Defaults to the seed the model was annotated with.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct MethodArgs {
    #[arg(long, value_enum, default_value = "loo")]
    method: MethodArg,
    /// Fold count for `--method kfold`.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long = "tie-strategy", value_enum, default_value = "backtrack")]
    tie_strategy: StrategyArg,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Verify a stored model instead of one built from `--data`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `args` (program name first) and runs the chosen command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };

    let result = match cli.command {
        Command::Train(args) => cmd_train(&args, out),
        Command::Predict(args) => cmd_predict(&args, out),
        Command::Evaluate(args) => cmd_evaluate(&args, out),
        Command::Compare(args) => cmd_compare(&args, out),
        Command::Verify(args) => cmd_verify(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    let file = File::open(&args.data)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", args.data.display()))))?;
    Dataset::load_csv(BufReader::new(file), &args.outcome_col)
}

fn load_model(path: &Path) -> Result<Tree> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Tree::from_json(&text)
}

fn describe_path(tree: &Tree, node: crate::induction::NodeId) -> Result<String> {
    let parts: Vec<String> = tree
        .path_constraints(node)?
        .into_iter()
        .map(|(a, v)| format!("{a}={v}"))
        .collect();
    Ok(format!("[{}]", parts.join(", ")))
}

fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<i32> {
    let dataset = load_dataset(&args.data)?;
    let tree = annotate_labels(build_tree(&dataset), args.tie_strategy.into(), args.seed);
    fs::write(&args.out, tree.to_json() + "\n")?;
    writeln!(out, "nodes: {}", tree.len())?;
    for leaf in tree.leaves() {
        writeln!(
            out,
            "leaf {} {} -> {}",
            leaf.id(),
            describe_path(&tree, leaf.id())?,
            leaf.resolved_label().unwrap_or("?")
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<i32> {
    let tree = load_model(&args.model)?;
    let annotation = tree.annotation();
    let strategy = args
        .tie_strategy
        .map(TieStrategy::from)
        .or(annotation.map(|a| a.strategy))
        .unwrap_or(TieStrategy::Backtrack);
    let seed = args.seed.or(annotation.map(|a| a.seed)).unwrap_or(0);

    let queries = match (&args.query, &args.data) {
        (Some(text), _) => {
            let query = Query::parse(text)?;
            if let Some(unknown) = query.attributes().find(|a| !tree.attribute_names().iter().any(|n| n == a)) {
                return Err(Error::UnknownAttribute { attribute: unknown.to_owned() });
            }
            vec![query]
        }
        (None, Some(path)) => read_queries(path)?,
        (None, None) => unreachable!("clap requires --query or --data"),
    };

    for query in &queries {
        let prediction = predict_seeded(&tree, query, strategy, seed)?;
        if args.trace {
            writeln!(out, "{}", prediction.to_json())?;
        } else {
            writeln!(out, "{}", prediction.label)?;
        }
    }
    Ok(EXIT_OK)
}

fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header = reader.headers()?.clone();
    if header.is_empty() {
        return Err(Error::MissingHeader);
    }
    let mut queries = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                line: record.position().map_or(0, |p| p.line()),
                expected: header.len(),
                found: record.len(),
            });
        }
        queries.push(header.iter().zip(record.iter()).fold(Query::new(), |q, (k, v)| q.with(k, v)));
    }
    Ok(queries)
}

fn eval_method(args: &MethodArgs) -> EvalMethod {
    match args.method {
        MethodArg::Loo => EvalMethod::LeaveOneOut,
        MethodArg::Kfold => EvalMethod::KFold(args.k),
    }
}

fn print_report(report: &crate::evaluation::EvalReport, json: bool, out: &mut dyn Write) -> Result<()> {
    if json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.render_table())?;
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> Result<i32> {
    let dataset = load_dataset(&args.data)?;
    let report = evaluate(&dataset, eval_method(&args.method), &[args.tie_strategy.into()], args.method.seed)?;
    print_report(&report, args.method.json, out)?;
    Ok(EXIT_OK)
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<i32> {
    let dataset = load_dataset(&args.data)?;
    let report = evaluate(&dataset, eval_method(&args.method), &TieStrategy::ALL, args.method.seed)?;
    print_report(&report, args.method.json, out)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let dataset = load_dataset(&args.data)?;
    let tree = match &args.model {
        Some(path) => load_model(path)?,
        None => build_tree(&dataset),
    };
    let checks = verify_tree(&dataset, &tree, args.seed)?;
    let mut failures = 0;
    for check in &checks {
        let path = describe_path(&tree, check.leaf)?;
        if check.passed {
            writeln!(out, "PASS leaf {} {} -> {}", check.leaf, path, check.tree.label)?;
        } else {
            failures += 1;
            writeln!(out, "FAIL leaf {} {}", check.leaf, path)?;
            writeln!(out, "  tree:   {}", check.tree.to_json())?;
            writeln!(out, "  oracle: {}", crate::to_sorted_json_compact(&check.oracle))?;
        }
    }
    writeln!(out, "{} of {} leaves agree", checks.len() - failures, checks.len())?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
