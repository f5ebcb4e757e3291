//! Budget presets, schedule resolution and multi-threaded restarts.

use std::str::FromStr;
use std::time::Instant;

use danneal_core::anneal::{
    AnnealParams, AnnealResult, Clock, Engine, InequalityConstraint, InitialState, OneHotMode, Plan, Schedule,
};
use danneal_core::qubo::QuboModel;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named default budgets. Step counts scale with the number of variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Quick,
    Paper,
}

impl Preset {
    pub fn restarts(self, kind: ProblemKind) -> usize {
        match (self, kind) {
            (Preset::Quick, ProblemKind::NumberPartition) => 4,
            (Preset::Quick, ProblemKind::GraphPartition) => 20,
            (Preset::Paper, ProblemKind::NumberPartition) => 8,
            (Preset::Paper, ProblemKind::GraphPartition) => 32,
        }
    }

    pub fn steps(self, num_vars: usize) -> usize {
        let per_var = match self {
            Preset::Quick => 80,
            Preset::Paper => 320,
        };
        (per_var * num_vars).max(5_000)
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "quick" => Ok(Preset::Quick),
            "paper" => Ok(Preset::Paper),
            _ => Err(format!("unknown preset `{s}` (expected quick or paper)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    NumberPartition,
    GraphPartition,
}

/// Solver settings; `None` fields fall back to the preset or to automatic scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub preset: Preset,
    pub restarts: Option<usize>,
    pub steps: Option<usize>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub seed: u64,
    pub one_hot_mode: OneHotMode,
    pub offset_increment: Option<f64>,
    pub time_limit_sec: Option<f64>,
    pub engine: Engine,
    pub initial_state: InitialState,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            preset: Preset::Quick,
            restarts: None,
            steps: None,
            t_start: None,
            t_end: None,
            seed: 0,
            one_hot_mode: OneHotMode::StructuredMoves,
            offset_increment: None,
            time_limit_sec: None,
            engine: Engine::ParallelTrial,
            initial_state: InitialState::Shared,
        }
    }
}

/// Outcome of one solve together with the settings it actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub result: AnnealResult,
    pub schedule: Schedule,
    pub restarts: usize,
    pub offset_increment: f64,
    pub seconds: f64,
}

/// Wall-clock time since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Anneals `model`, running restarts on the rayon pool.
///
/// The result does not depend on the thread count.
pub fn solve(
    model: &QuboModel,
    constraints: &[InequalityConstraint],
    groups: Option<&[Vec<usize>]>,
    one_hot_penalty: Option<f64>,
    kind: ProblemKind,
    config: &SolverConfig,
) -> Result<Solved> {
    let clock = WallClock::start();
    let restarts = config.restarts.unwrap_or_else(|| config.preset.restarts(kind));
    let steps = config.steps.unwrap_or_else(|| config.preset.steps(model.num_vars()));
    let params = AnnealParams {
        restarts,
        seed: config.seed,
        initial_state: config.initial_state,
        offset_increment: config.offset_increment,
        one_hot_mode: config.one_hot_mode,
        one_hot_penalty,
        engine: config.engine,
        time_limit_sec: config.time_limit_sec,
        trace_every: None,
    };
    // Temperatures are filled in once the start state is known.
    let probe = Schedule::geometric(1.0, 1.0, 1)?;
    let mut plan = Plan::new(model, constraints, probe, params, groups)?;
    plan.schedule = resolve_schedule(&plan, steps, restarts, config)?;
    let space = plan.space()?;
    let shared = plan.shared_walker(&space)?;
    let outcomes = (0..restarts)
        .into_par_iter()
        .map(|r| plan.run_restart(&space, &shared, r, &clock))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let result = plan.finish(outcomes);
    Ok(Solved {
        result,
        schedule: plan.schedule,
        restarts,
        offset_increment: plan.offset_increment,
        seconds: clock.elapsed_secs(),
    })
}

fn resolve_schedule(plan: &Plan<'_>, steps: usize, restarts: usize, config: &SolverConfig) -> Result<Schedule> {
    let (t_start, t_end) = match (config.t_start, config.t_end) {
        (Some(a), Some(b)) => (a, b),
        (start, end) => {
            let space = plan.space()?;
            let auto = Schedule::auto(&space, &plan.shared_start(), steps * restarts, restarts, config.seed)?;
            let t_start = start.unwrap_or(auto.t_start);
            (t_start, end.unwrap_or(t_start * 1e-3))
        }
    };
    Schedule::geometric(t_start, t_end, steps).map_err(|e| Error::Config(format!("schedule: {e}")))
}
