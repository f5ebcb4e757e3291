//! The three commands as library calls, independent of argument parsing.

use std::fs::File;
use std::io::BufReader;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Instant;

use danneal_core::anneal::{Engine, OneHotMode};
use danneal_core::problems::{
    boundary_weight_stats, build_graph_partition, build_number_partition, decode_number_partition, modularity,
    NumberSet, PartitionProblem,
};
use danneal_core::Error as CoreError;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::datasets::Builtin;
use crate::error::{Error, Result};
use crate::io::{load_edge_list, load_electrical_lines, load_numbers, LabeledGraph};
use crate::report::{
    Assignment, Boundary, GraphInfo, KResult, NumpartRun, PartitionRun, Report, Run, RunConfig, SolveMeta, SolveTiming,
    Timing,
};
use crate::solve::{solve, ProblemKind, Solved, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Edges(PathBuf),
    Electrical(PathBuf),
    Builtin(Builtin),
}

impl GraphSource {
    pub fn load(&self) -> Result<LabeledGraph> {
        match self {
            GraphSource::Edges(path) => Ok(LabeledGraph::unlabeled(load_edge_list(BufReader::new(File::open(path)?))?)),
            GraphSource::Electrical(path) => load_electrical_lines(File::open(path)?),
            GraphSource::Builtin(b) => Ok(b.load()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GraphSource::Edges(path) => format!("edges:{}", path.display()),
            GraphSource::Electrical(path) => format!("electrical:{}", path.display()),
            GraphSource::Builtin(b) => format!("builtin:{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NumberSource {
    File(PathBuf),
    Values(Vec<u64>),
    /// `n` integers drawn uniformly from `1..=max_value`.
    Generate {
        n: usize,
        max_value: u64,
        seed: u64,
    },
}

impl NumberSource {
    pub fn load(&self) -> Result<Vec<u64>> {
        match self {
            NumberSource::File(path) => load_numbers(BufReader::new(File::open(path)?)),
            NumberSource::Values(values) => Ok(values.clone()),
            NumberSource::Generate { n, max_value, seed } => {
                if *max_value == 0 {
                    return Err(Error::Config("--max-value must be at least 1".into()));
                }
                let mut rng = Xoshiro256PlusPlus::seed_from_u64(*seed);
                Ok((0..*n).map(|_| rng.gen_range(1..=*max_value)).collect())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            NumberSource::File(path) => path.display().to_string(),
            NumberSource::Values(_) => "inline".into(),
            NumberSource::Generate { n, max_value, seed } => format!("generate(n={n}, max={max_value}, seed={seed})"),
        }
    }
}

pub fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::ParallelTrial => "parallel-trial",
        Engine::Sequential => "sequential",
    }
}

pub fn one_hot_name(mode: OneHotMode) -> &'static str {
    match mode {
        OneHotMode::StructuredMoves => "moves",
        OneHotMode::Penalty => "penalty",
    }
}

fn run_config(config: &SolverConfig) -> RunConfig {
    RunConfig {
        preset: format!("{:?}", config.preset).to_lowercase(),
        engine: engine_name(config.engine).into(),
        restarts: config.restarts,
        steps: config.steps,
        t_start: config.t_start,
        t_end: config.t_end,
        seed: config.seed,
        offset_increment: config.offset_increment,
        time_limit_sec: config.time_limit_sec,
    }
}

fn solve_meta(solved: &Solved) -> SolveMeta {
    let r = &solved.result;
    SolveMeta {
        restarts: solved.restarts,
        steps: solved.schedule.steps,
        t_start: solved.schedule.t_start,
        t_end: solved.schedule.t_end,
        offset_increment: solved.offset_increment,
        best_restart: r.best_restart,
        steps_completed: r.per_restart.iter().map(|s| s.steps_completed).sum(),
        accepted_moves: r.per_restart.iter().map(|s| s.accepted_moves).sum(),
        timed_out: r.timed_out,
    }
}

pub fn run_numpart(source: &NumberSource, expect_optimal: bool, config: &SolverConfig) -> Result<Report> {
    let clock = Instant::now();
    let set = NumberSet::new(source.load()?)?;
    let model = build_number_partition(&set);
    let solved = solve(&model, &[], None, None, ProblemKind::NumberPartition, config)?;
    let split = decode_number_partition(&set, &solved.result.best_bits)?;
    let run = NumpartRun {
        config: run_config(config),
        source: source.describe(),
        values: set.values().to_vec(),
        side: solved.result.best_bits.iter().map(|&b| if b { '1' } else { '0' }).collect(),
        sum_a: split.sum_a,
        sum_b: split.sum_b,
        d: split.d,
        best_energy: solved.result.best_total_energy,
        expect_optimal,
        optimal: split.d <= 1,
        solver: solve_meta(&solved),
    };
    let timing = Timing {
        total_seconds: clock.elapsed().as_secs_f64(),
        solves: vec![SolveTiming { k: None, seconds: solved.seconds }],
    };
    Ok(Report::new(Run::Numpart(run), timing))
}

/// Problem settings shared by `graphpart` and `sweepk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionSettings {
    pub gamma: f64,
    pub lambda: f64,
}

impl Default for PartitionSettings {
    fn default() -> Self {
        Self { gamma: 1.0, lambda: 1.0 }
    }
}

/// Solves one group count and decodes the best state.
pub fn solve_partition(
    graph: &LabeledGraph,
    k: usize,
    settings: PartitionSettings,
    config: &SolverConfig,
) -> Result<(KResult, f64)> {
    let problem = PartitionProblem {
        graph: graph.graph.clone(),
        k,
        gamma: settings.gamma,
        one_hot_penalty: None,
        nonempty_lambda: settings.lambda,
    };
    let q = build_graph_partition(&problem)?;
    let solved =
        solve(&q.model, &q.constraints, Some(&q.groups), Some(q.one_hot_penalty), ProblemKind::GraphPartition, config)?;
    let mut result = KResult {
        k,
        feasible: false,
        best_energy: solved.result.best_total_energy,
        modularity: None,
        group_sizes: None,
        boundary: None,
        assignment: None,
        zero_hot: Vec::new(),
        multi_hot: Vec::new(),
        solver: solve_meta(&solved),
    };
    match q.decode(&solved.result.best_bits) {
        Ok(assign) => {
            let stats = boundary_weight_stats(&graph.graph, &assign)?;
            result.feasible = true;
            result.modularity = Some(modularity(&graph.graph, &assign, settings.gamma)?);
            result.group_sizes = Some(assign.group_sizes());
            result.boundary = Some(Boundary {
                boundary_mean: stats.boundary_mean,
                interior_mean: stats.interior_mean,
                boundary_count: stats.boundary_count,
                interior_count: stats.interior_count,
            });
            result.assignment =
                Some(Assignment(graph.labels.iter().cloned().zip(assign.group_of().iter().copied()).collect()));
        }
        Err(CoreError::Infeasible { zero_hot, multi_hot }) => {
            result.zero_hot = zero_hot;
            result.multi_hot = multi_hot;
        }
        Err(e) => return Err(e.into()),
    }
    Ok((result, solved.seconds))
}

/// Solves every `k` in `ks` and assembles a report in ascending `k` order.
///
/// A single-element range yields a `graphpart` report, anything else `sweepk`.
pub fn run_partition(
    source: &GraphSource,
    ks: RangeInclusive<usize>,
    settings: PartitionSettings,
    config: &SolverConfig,
) -> Result<Report> {
    let clock = Instant::now();
    let graph = source.load()?;
    if ks.is_empty() || *ks.start() == 0 {
        return Err(Error::Config(format!("invalid group range {}..={}", ks.start(), ks.end())));
    }
    let single = ks.start() == ks.end();
    let mut results = Vec::new();
    let mut solves = Vec::new();
    for k in ks {
        let (result, seconds) = solve_partition(&graph, k, settings, config)?;
        solves.push(SolveTiming { k: Some(k), seconds });
        results.push(result);
    }
    let best = results.iter().filter_map(|r| r.modularity.map(|q| (r.k, q))).fold(
        None,
        |acc: Option<(usize, f64)>, (k, q)| match acc {
            Some((_, best)) if best >= q => acc,
            _ => Some((k, q)),
        },
    );
    let stats = graph.graph.stats();
    let run = PartitionRun {
        config: run_config(config),
        one_hot_mode: one_hot_name(config.one_hot_mode).into(),
        gamma: settings.gamma,
        lambda: settings.lambda,
        graph: GraphInfo {
            source: source.describe(),
            n: stats.n,
            edge_count: stats.edge_count,
            total_weight_2m: stats.total_weight_2m,
            min_weight: stats.min_weight,
            max_weight: stats.max_weight,
            mean_weight: stats.mean_weight,
        },
        results,
        best_k: best.map(|b| b.0),
        best_modularity: best.map(|b| b.1),
    };
    let run = if single { Run::Graphpart(run) } else { Run::Sweepk(run) };
    Ok(Report::new(run, Timing { total_seconds: clock.elapsed().as_secs_f64(), solves }))
}
