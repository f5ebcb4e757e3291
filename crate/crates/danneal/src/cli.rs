//! Argument parsing and exit codes for the `danneal` binary.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use danneal_core::anneal::{Engine, OneHotMode};

use crate::commands::{run_numpart, run_partition, GraphSource, NumberSource, PartitionSettings};
use crate::datasets::Builtin;
use crate::error::{Error, Result};
use crate::report::{emit_report, Format, Report, Run};
use crate::solve::{Preset, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNMET: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "danneal", version, about = "Parallel-trial annealing for number and graph partitioning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a multiset of positive integers into two halves of near-equal sum.
    Numpart(NumpartArgs),
    /// Partition a graph into K groups by maximising modularity.
    Graphpart(GraphpartArgs),
    /// Run graphpart for every K in a range and report the best K.
    Sweepk(SweepArgs),
}

#[derive(Debug, Args)]
pub struct NumpartArgs {
    /// File with one positive integer per line.
    #[arg(required_unless_present = "generate", conflicts_with = "generate")]
    pub input: Option<PathBuf>,
    /// Draw this many integers uniformly at random instead of reading a file.
    #[arg(long, value_name = "N")]
    pub generate: Option<usize>,
    /// Upper bound for generated integers.
    #[arg(long, default_value_t = 10_000, requires = "generate")]
    pub max_value: u64,
    /// Exit with status 2 unless the difference is 0 or 1.
    #[arg(long)]
    pub expect_optimal: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GraphpartArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Number of groups.
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long)]
    pub k_max: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Edge list with `u v [w]` lines.
    #[arg(long, value_name = "PATH")]
    pub edges: Option<PathBuf>,
    /// CSV of lines with header `from_bus,to_bus,r_ohm,x_ohm`.
    #[arg(long, value_name = "PATH")]
    pub electrical: Option<PathBuf>,
    /// Bundled dataset: karate, ieee33 or ieee118.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<Builtin>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Modularity resolution.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Weight of each non-empty-group constraint.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// How the one-group-per-node rule is enforced.
    #[arg(long, value_enum, default_value_t = OneHotArg::Moves)]
    pub onehot: OneHotArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OneHotArg {
    /// Moves that relocate a node between groups, always feasible.
    Moves,
    /// Quadratic penalty added to the objective.
    Penalty,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Default budget when --restarts or --steps is absent.
    #[arg(long, default_value = "quick")]
    pub preset: Preset,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Monte Carlo steps per restart.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub t_start: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Escape offset added after each step without an accepted move.
    #[arg(long)]
    pub offset_inc: Option<f64>,
    /// Wall-clock limit per solve, in seconds.
    #[arg(long)]
    pub time_limit_sec: Option<f64>,
    /// Use the single-flip sequential annealer instead of parallel trials.
    #[arg(long)]
    pub baseline_sa: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl SolverArgs {
    fn config(&self, one_hot: OneHotArg) -> Result<SolverConfig> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err(Error::Config(format!("{name} must be positive"))),
            _ => Ok(()),
        };
        positive("--t-start", self.t_start)?;
        positive("--t-end", self.t_end)?;
        positive("--time-limit-sec", self.time_limit_sec)?;
        if matches!(self.offset_inc, Some(x) if !(x.is_finite() && x >= 0.0)) {
            return Err(Error::Config("--offset-inc must be non-negative".into()));
        }
        if self.restarts == Some(0) || self.steps == Some(0) {
            return Err(Error::Config("--restarts and --steps must be at least 1".into()));
        }
        Ok(SolverConfig {
            preset: self.preset,
            restarts: self.restarts,
            steps: self.steps,
            t_start: self.t_start,
            t_end: self.t_end,
            seed: self.seed,
            one_hot_mode: match one_hot {
                OneHotArg::Moves => OneHotMode::StructuredMoves,
                OneHotArg::Penalty => OneHotMode::Penalty,
            },
            offset_increment: self.offset_inc,
            time_limit_sec: self.time_limit_sec,
            engine: if self.baseline_sa { Engine::Sequential } else { Engine::ParallelTrial },
            ..SolverConfig::default()
        })
    }
}

impl GraphArgs {
    fn source(&self) -> GraphSource {
        let src = &self.source;
        match (&src.edges, &src.electrical, src.builtin) {
            (Some(p), _, _) => GraphSource::Edges(p.clone()),
            (_, Some(p), _) => GraphSource::Electrical(p.clone()),
            (_, _, Some(b)) => GraphSource::Builtin(b),
            _ => unreachable!("clap requires one graph source"),
        }
    }

    fn settings(&self) -> Result<PartitionSettings> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config("--gamma must be positive".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config("--lambda must be non-negative".into()));
        }
        Ok(PartitionSettings { gamma: self.gamma, lambda: self.lambda })
    }
}

/// Exit status implied by a finished report.
pub fn exit_code(report: &Report) -> i32 {
    match &report.run {
        Run::Numpart(run) if run.expect_optimal && !run.optimal => EXIT_UNMET,
        Run::Numpart(_) => EXIT_OK,
        Run::Graphpart(run) | Run::Sweepk(run) => {
            if run.results.iter().all(|r| r.feasible) {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            }
        }
    }
}

fn execute(cli: Cli) -> Result<(Report, OutputArgs)> {
    match cli.command {
        Command::Numpart(args) => {
            let source = match (args.input, args.generate) {
                (Some(path), _) => NumberSource::File(path),
                (None, Some(n)) => NumberSource::Generate { n, max_value: args.max_value, seed: args.solver.seed },
                (None, None) => unreachable!("clap requires an input or --generate"),
            };
            let config = args.solver.config(OneHotArg::Moves)?;
            Ok((run_numpart(&source, args.expect_optimal, &config)?, args.output))
        }
        Command::Graphpart(args) => {
            let config = args.solver.config(args.graph.onehot)?;
            let report = run_partition(&args.graph.source(), args.k..=args.k, args.graph.settings()?, &config)?;
            Ok((report, args.output))
        }
        Command::Sweepk(args) => {
            if args.k_min == 0 || args.k_min > args.k_max {
                return Err(Error::Config("need 1 <= --k-min <= --k-max".into()));
            }
            let config = args.solver.config(args.graph.onehot)?;
            let report = run_partition(&args.graph.source(), args.k_min..=args.k_max, args.graph.settings()?, &config)?;
            Ok((report, args.output))
        }
    }
}

fn summarize(report: &Report, err: &mut dyn Write) -> io::Result<()> {
    match &report.run {
        Run::Numpart(run) => writeln!(err, "sum_a={} sum_b={} d={}", run.sum_a, run.sum_b, run.d),
        Run::Graphpart(run) | Run::Sweepk(run) => {
            for r in &run.results {
                match r.modularity {
                    Some(q) => writeln!(err, "k={} modularity={q:.6}", r.k)?,
                    None => writeln!(err, "k={} infeasible", r.k)?,
                }
            }
            match run.best_k {
                Some(k) => writeln!(err, "best k={k}"),
                None => Ok(()),
            }
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = execute(cli).and_then(|(report, output)| {
        let format = match output.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
        match &output.out {
            Some(path) => emit_report(&report, format, BufWriter::new(File::create(path)?))?,
            None => emit_report(&report, format, &mut *stdout)?,
        }
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            let _ = summarize(&report, stderr);
            exit_code(&report)
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    fn status(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(status(&["danneal"]).0, EXIT_USAGE);
        assert_eq!(status(&["danneal", "graphpart", "--k", "2"]).0, EXIT_USAGE);
        assert_eq!(status(&["danneal", "graphpart", "--builtin", "karate", "--edges", "x", "--k", "2"]).0, EXIT_USAGE);
        assert_eq!(status(&["danneal", "graphpart", "--builtin", "nowhere", "--k", "2"]).0, EXIT_USAGE);
        assert_eq!(status(&["danneal", "numpart", "/no/such/file"]).0, EXIT_USAGE);
        assert_eq!(status(&["danneal", "sweepk", "--builtin", "karate", "--k-min", "5", "--k-max", "3"]).0, EXIT_USAGE);
        assert_eq!(status(&["danneal", "numpart", "--generate", "5", "--t-start", "-1"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_and_version_exit_zero() {
        let (code, out, _) = status(&["danneal", "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("sweepk"));
        assert_eq!(status(&["danneal", "--version"]).0, EXIT_OK);
    }
}
