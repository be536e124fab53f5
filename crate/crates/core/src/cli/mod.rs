//! `star-orienteer` command line: `solve`, `validate` and `bench`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench;
use crate::reward::{FactorSet, Objective, RewardModel};
use crate::solver::{self, Query, SolveError};
use crate::star_graph::{validate_star, GraphDocument, NodeId};
use crate::Dataset;

pub mod render;

pub use render::{parse_json_goals, render, OutputFormat, RenderError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "star-orienteer",
    version,
    about = "Top-k goal selection on star graphs under travel budgets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find the k best goals reachable within the budget
    Solve(SolveArgs),
    /// Check that a graph file describes a valid star graph
    Validate(ValidateArgs),
    /// Measure solve time and queue occupancy across graph sizes
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Graph file (JSON)
    #[arg(long)]
    graph: PathBuf,
    /// Start node; must match the start stored in the graph file
    #[arg(long)]
    start: Option<String>,
    /// Travel budget B, meters
    #[arg(long)]
    budget: f64,
    /// Slack added to the budget, meters ("inf" allowed)
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Upper limit for budget plus slack, meters
    #[arg(long, default_value_t = f64::INFINITY)]
    limit: f64,
    /// Number of goals
    #[arg(short = 'k', default_value_t = 3)]
    k: usize,
    #[arg(long)]
    objective: String,
    /// Reward factor; repeat for several
    #[arg(long = "factor")]
    factors: Vec<String>,
    /// Restrict candidates to this node; repeat for several
    #[arg(long = "only")]
    only: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Graph sizes to time
    #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 100_000, 1_000_000])]
    sizes: Vec<usize>,
    #[arg(short = 'k', default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn data(message: impl ToString) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.to_string(),
        }
    }
}

/// Parse `args` (program name first), run the subcommand and return the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
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
        Command::Solve(args) => run_solve(args, out, err),
        Command::Validate(args) => run_validate(args, out, err),
        Command::Bench(args) => run_bench(args, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &PathBuf, err: &mut dyn Write) -> Result<Dataset, Failure> {
    let data = Dataset::from_path(path).map_err(Failure::data)?;
    for w in &data.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(data)
}

fn run_solve(args: SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let objective = Objective::new(args.objective).map_err(Failure::usage)?;
    let factors = FactorSet::new(&args.factors).map_err(Failure::usage)?;
    let mut builder = Query::builder(args.budget, objective)
        .delta(args.delta)
        .limit(args.limit)
        .k(args.k)
        .factors(factors);
    if !args.only.is_empty() {
        builder = builder.whitelist(args.only.into_iter().map(NodeId::from));
    }
    let query = builder.build().map_err(Failure::usage)?;

    let data = load(&args.graph, err)?;
    if let Some(start) = args.start {
        if start != data.graph.start().as_str() {
            return Err(Failure::data(format!(
                "graph stores costs from start {}, not {start}",
                data.graph.start()
            )));
        }
    }
    let goals = solver::solve(&data.graph, &data.rewards, &query)
        .map_err(|e: SolveError| Failure::data(e))?;
    let text = render(&goals, args.format, &data.graph, &query).map_err(Failure::data)?;
    out.write_all(text.as_bytes()).map_err(Failure::data)?;
    Ok(EXIT_OK)
}

fn run_validate(
    args: ValidateArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let doc = GraphDocument::from_path(&args.graph).map_err(Failure::data)?;
    for w in doc.warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
    let report = validate_star(&doc);
    let rewards = RewardModel::from_document(&doc);
    if report.is_valid() {
        if let Ok(model) = &rewards {
            let channels: Vec<&str> = model.channel_keys().collect();
            let _ = writeln!(
                out,
                "valid star graph: start {}, {} leaves, channels [{}]",
                doc.start.as_deref().unwrap_or_default(),
                doc.nodes.len(),
                channels.join(", ")
            );
            return Ok(EXIT_OK);
        }
    }
    for v in &report.violations {
        let _ = writeln!(out, "{v}");
    }
    if let Err(e) = &rewards {
        let _ = writeln!(out, "invalid reward: {e}");
    }
    let count = report.len() + usize::from(rewards.is_err());
    Err(Failure::data(format!(
        "{} has {count} violation(s)",
        args.graph.display()
    )))
}

fn run_bench(args: BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let report = bench::scaling_run(&args.sizes, args.k, args.seed, args.repetitions).map_err(
        |e| match e {
            bench::BenchError::InvalidParams(_) => Failure::usage(e),
            other => Failure::data(other),
        },
    )?;
    let text = match args.format {
        ReportFormat::Table => format!("{report}\n"),
        ReportFormat::Json => format!("{}\n", report.to_json_pretty()),
    };
    out.write_all(text.as_bytes()).map_err(Failure::data)?;
    Ok(EXIT_OK)
}
