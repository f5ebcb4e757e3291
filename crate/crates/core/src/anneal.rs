//! Parallel-trial simulated annealing with a dynamic escape offset.
//!
//! Every Monte Carlo step evaluates all candidate moves against the same
//! state, lets each accept independently with probability
//! `min(1, exp(−(Δ − offset) / T))`, and applies one of the accepted moves
//! chosen uniformly. When nothing is accepted the offset grows by
//! `offset_increment`; any accepted move resets it to zero.
//!
//! Inequality constraints live outside the QUBO as hinge penalties
//! `λ · max(0, bound − Σ a_v x_v)` with their own incremental bookkeeping.
//! One-hot blocks can either be penalised inside the QUBO or kept feasible
//! by construction with pair moves that relocate the set bit of a block.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::qubo::{check_index, check_len, BitState, QuboModel};
use crate::{Error, Result};

/// Scaled excess energies above this are never accepted: `e^-40` is below the
/// resolution of a 53-bit uniform draw.
const MAX_EXPONENT: f64 = 40.0;
/// Accepted moves between full recomputations of the tracked state.
const RESYNC_INTERVAL: u64 = 1 << 17;
/// Steps between wall-clock checks.
const CLOCK_INTERVAL: usize = 32;
/// Random moves sampled by [`Schedule::auto`] to estimate the energy scale.
const SCALE_PROBES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cooling {
    Geometric,
    Linear,
}

/// Temperature schedule over a fixed number of Monte Carlo steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub kind: Cooling,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl Schedule {
    pub fn new(kind: Cooling, t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_start.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidParameter("temperatures must be finite and positive"));
        }
        if t_start < t_end {
            return Err(Error::InvalidParameter("t_start must not be below t_end"));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("schedule needs at least one step"));
        }
        Ok(Self { kind, t_start, t_end, steps })
    }

    pub fn geometric(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        Self::new(Cooling::Geometric, t_start, t_end, steps)
    }

    pub fn linear(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        Self::new(Cooling::Linear, t_start, t_end, steps)
    }

    /// Temperature at `step`; steps past the end return `t_end`.
    pub fn temperature(&self, step: usize) -> f64 {
        if self.steps == 1 || step == 0 {
            return self.t_start;
        }
        if step >= self.steps - 1 {
            return self.t_end;
        }
        let frac = step as f64 / (self.steps - 1) as f64;
        match self.kind {
            Cooling::Geometric => self.t_start * libm::pow(self.t_end / self.t_start, frac),
            Cooling::Linear => self.t_start + (self.t_end - self.t_start) * frac,
        }
    }

    /// Scale-free default: geometric from the largest `|Δ|` seen over 100
    /// random moves at `start` down to a thousandth of it, with
    /// `sweep_budget / restarts` steps per run.
    pub fn auto(
        space: &SearchSpace<'_>,
        start: &[bool],
        sweep_budget: usize,
        restarts: usize,
        seed: u64,
    ) -> Result<Self> {
        let walker = Walker::new(space, start.to_vec())?;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        rng.long_jump();
        let t_start = walker.probe_max_delta(SCALE_PROBES, &mut rng);
        let t_start = if t_start > 0.0 && t_start.is_finite() { t_start } else { 1.0 };
        let steps = (sweep_budget / restarts.max(1)).max(1);
        Self::geometric(t_start, t_start * 1e-3, steps)
    }
}

/// Free-function form of [`Schedule::temperature`].
pub fn schedule_temperature(schedule: &Schedule, step: usize) -> f64 {
    schedule.temperature(step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialState {
    /// Every restart begins from the same fixed state, built once.
    #[default]
    Shared,
    RandomPerRestart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OneHotMode {
    /// Expand `A · Σ_b (Σ_{v∈b} x_v − 1)²` into the QUBO and use single flips.
    Penalty,
    /// Keep every block one-hot and move its set bit.
    #[default]
    StructuredMoves,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    ParallelTrial,
    /// Plain Metropolis annealing: one random candidate per trial, no offset.
    /// A schedule step is one sweep of `n` trials (one per block in
    /// structured mode).
    Sequential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealParams {
    pub restarts: usize,
    pub seed: u64,
    pub initial_state: InitialState,
    /// Escape offset growth per all-rejected step; `None` picks
    /// `0.1 × mean |W_ij|`.
    pub offset_increment: Option<f64>,
    pub one_hot_mode: OneHotMode,
    /// Penalty strength for [`OneHotMode::Penalty`]; `None` picks
    /// `2 · max_i Σ_j |W_ij|`.
    pub one_hot_penalty: Option<f64>,
    pub engine: Engine,
    pub time_limit_sec: Option<f64>,
    /// Record a trace sample every this many steps.
    pub trace_every: Option<usize>,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            restarts: 1,
            seed: 0,
            initial_state: InitialState::Shared,
            offset_increment: None,
            one_hot_mode: OneHotMode::StructuredMoves,
            one_hot_penalty: None,
            engine: Engine::ParallelTrial,
            time_limit_sec: None,
            trace_every: None,
        }
    }
}

impl AnnealParams {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1"));
        }
        if let Some(inc) = self.offset_increment {
            if !(inc.is_finite() && inc >= 0.0) {
                return Err(Error::InvalidParameter("offset increment must be finite and non-negative"));
            }
        }
        if let Some(limit) = self.time_limit_sec {
            if limit.is_nan() || limit < 0.0 {
                return Err(Error::InvalidParameter("time limit must be non-negative"));
            }
        }
        if self.trace_every == Some(0) {
            return Err(Error::InvalidParameter("trace interval must be positive"));
        }
        Ok(())
    }
}

/// Requires `Σ coeff · x ≥ bound`; violations cost `lambda · (bound − Σ coeff · x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityConstraint {
    pub terms: Vec<(usize, i64)>,
    pub bound: i64,
    pub lambda: f64,
}

impl InequalityConstraint {
    pub fn new(terms: Vec<(usize, i64)>, bound: i64, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter("constraint lambda must be finite and non-negative"));
        }
        Ok(Self { terms, bound, lambda })
    }

    pub fn lhs(&self, bits: &[bool]) -> i64 {
        self.terms.iter().filter(|t| bits[t.0]).map(|t| t.1).sum()
    }

    pub fn cost(&self, bits: &[bool]) -> f64 {
        hinge(self.lambda, self.bound, self.lhs(bits))
    }
}

#[inline]
fn hinge(lambda: f64, bound: i64, lhs: i64) -> f64 {
    if lhs >= bound {
        0.0
    } else {
        lambda * (bound - lhs) as f64
    }
}

/// QUBO energy plus every constraint's hinge cost.
pub fn evaluate_total(model: &QuboModel, constraints: &[InequalityConstraint], bits: &[bool]) -> Result<f64> {
    let mut total = model.energy(bits)?;
    for c in constraints {
        for &(v, _) in &c.terms {
            check_index(v, bits.len())?;
        }
        total += c.cost(bits);
    }
    Ok(total)
}

/// Elapsed wall-clock time, supplied by the caller.
pub trait Clock {
    fn elapsed_secs(&self) -> f64;
}

/// A clock that never advances; time limits are then never hit.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// Candidate move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Flip(usize),
    /// Clear one bit and set another inside the same one-hot block.
    Swap {
        clear: usize,
        set: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub accepted: Option<Move>,
    /// Offset to use for the next step.
    pub offset: f64,
    /// How many candidates accepted before the tie-break.
    pub acceptances: usize,
}

/// Shared, read-only description of a search: model, constraints and
/// optional one-hot block structure, plus derived lookup tables.
#[derive(Debug, Clone)]
pub struct SearchSpace<'a> {
    model: &'a QuboModel,
    constraints: &'a [InequalityConstraint],
    incidence: Vec<Vec<(usize, i64)>>,
    blocks: Vec<Vec<usize>>,
    /// Per variable: `(block, position)` when it belongs to a block.
    slot: Vec<Option<(usize, usize)>>,
    /// Per block: row-major couplings between its members.
    intra: Vec<Vec<f64>>,
}

impl<'a> SearchSpace<'a> {
    pub fn new(
        model: &'a QuboModel,
        constraints: &'a [InequalityConstraint],
        blocks: Option<&[Vec<usize>]>,
    ) -> Result<Self> {
        let n = model.num_vars();
        let mut incidence = vec![Vec::new(); n];
        for (c, constraint) in constraints.iter().enumerate() {
            for &(v, coeff) in &constraint.terms {
                check_index(v, n)?;
                match incidence[v].iter_mut().find(|e: &&mut (usize, i64)| e.0 == c) {
                    Some(e) => e.1 += coeff,
                    None => incidence[v].push((c, coeff)),
                }
            }
        }
        let blocks: Vec<Vec<usize>> = blocks.map(<[_]>::to_vec).unwrap_or_default();
        let mut slot = vec![None; n];
        let mut intra = Vec::with_capacity(blocks.len());
        for (b, members) in blocks.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidParameter("one-hot blocks must be non-empty"));
            }
            for (p, &v) in members.iter().enumerate() {
                check_index(v, n)?;
                if slot[v].replace((b, p)).is_some() {
                    return Err(Error::InvalidParameter("one-hot blocks must be disjoint"));
                }
            }
            let k = members.len();
            let mut table = vec![0.0; k * k];
            for (p, &u) in members.iter().enumerate() {
                for (q, &v) in members.iter().enumerate() {
                    table[p * k + q] = model.coupling(u, v);
                }
            }
            intra.push(table);
        }
        Ok(Self { model, constraints, incidence, blocks, slot, intra })
    }

    pub fn model(&self) -> &'a QuboModel {
        self.model
    }

    pub fn constraints(&self) -> &'a [InequalityConstraint] {
        self.constraints
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn has_blocks(&self) -> bool {
        !self.blocks.is_empty()
    }
}

/// Mutable search state: tracked QUBO state, constraint sums and block positions.
#[derive(Debug, Clone)]
pub struct Walker<'s, 'a> {
    space: &'s SearchSpace<'a>,
    state: BitState,
    sums: Vec<i64>,
    penalty: f64,
    /// Set position per block, or `None` when the block is not one-hot.
    hot: Vec<Option<usize>>,
    accepted: Vec<Move>,
    since_resync: u64,
}

impl<'s, 'a> Walker<'s, 'a> {
    pub fn new(space: &'s SearchSpace<'a>, bits: Vec<bool>) -> Result<Self> {
        check_len(&bits, space.model.num_vars())?;
        let state = BitState::new(space.model, bits)?;
        let mut walker = Self {
            space,
            state,
            sums: vec![0; space.constraints.len()],
            penalty: 0.0,
            hot: vec![None; space.blocks.len()],
            accepted: Vec::new(),
            since_resync: 0,
        };
        walker.recompute_constraints();
        for b in 0..space.blocks.len() {
            walker.refresh_block(b);
        }
        Ok(walker)
    }

    fn recompute_constraints(&mut self) {
        let bits = self.state.bits();
        self.penalty = 0.0;
        for (c, constraint) in self.space.constraints.iter().enumerate() {
            self.sums[c] = constraint.lhs(bits);
            self.penalty += hinge(constraint.lambda, constraint.bound, self.sums[c]);
        }
    }

    fn refresh_block(&mut self, b: usize) {
        let bits = self.state.bits();
        let mut set = self.space.blocks[b].iter().enumerate().filter(|(_, &v)| bits[v]);
        self.hot[b] = match (set.next(), set.next()) {
            (Some((p, _)), None) => Some(p),
            _ => None,
        };
    }

    pub fn bits(&self) -> &[bool] {
        self.state.bits()
    }

    pub fn state(&self) -> &BitState {
        &self.state
    }

    /// Tracked QUBO energy plus hinge penalties.
    pub fn total_energy(&self) -> f64 {
        self.state.energy() + self.penalty
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    /// Whether every block currently holds exactly one set bit.
    pub fn is_one_hot(&self) -> bool {
        self.hot.iter().all(Option::is_some)
    }

    /// Total-energy change of flipping `i`.
    #[inline]
    pub fn flip_delta(&self, i: usize) -> f64 {
        let step = if self.state.bits()[i] { -1 } else { 1 };
        let mut d = self.state.flip_delta(i);
        for &(c, coeff) in &self.space.incidence[i] {
            let constraint = &self.space.constraints[c];
            let before = self.sums[c];
            d += hinge(constraint.lambda, constraint.bound, before + step * coeff)
                - hinge(constraint.lambda, constraint.bound, before);
        }
        d
    }

    /// Total-energy change of clearing `clear` (currently set) and setting
    /// `set` (currently clear); `w` is their coupling.
    #[inline]
    fn swap_delta_with(&self, clear: usize, set: usize, w: f64) -> f64 {
        let fields = self.state.fields();
        let mut d = fields[set] - fields[clear] - 2.0 * w;
        let inc_clear = &self.space.incidence[clear];
        let inc_set = &self.space.incidence[set];
        for &(c, coeff) in inc_clear {
            let extra = inc_set.iter().find(|e| e.0 == c).map_or(0, |e| e.1);
            let constraint = &self.space.constraints[c];
            let before = self.sums[c];
            d += hinge(constraint.lambda, constraint.bound, before - coeff + extra)
                - hinge(constraint.lambda, constraint.bound, before);
        }
        for &(c, coeff) in inc_set {
            if inc_clear.iter().any(|e| e.0 == c) {
                continue;
            }
            let constraint = &self.space.constraints[c];
            let before = self.sums[c];
            d += hinge(constraint.lambda, constraint.bound, before + coeff)
                - hinge(constraint.lambda, constraint.bound, before);
        }
        d
    }

    /// Total-energy change of a move. Swaps require `clear` set and `set` clear.
    pub fn move_delta(&self, mv: Move) -> f64 {
        match mv {
            Move::Flip(i) => self.flip_delta(i),
            Move::Swap { clear, set } => {
                debug_assert!(self.bits()[clear] && !self.bits()[set]);
                self.swap_delta_with(clear, set, self.space.model.coupling(clear, set))
            }
        }
    }

    pub fn apply(&mut self, mv: Move) {
        match mv {
            Move::Flip(i) => self.flip_now(i),
            Move::Swap { clear, set } => {
                self.flip_now(clear);
                self.flip_now(set);
            }
        }
        self.since_resync += 1;
        if self.since_resync >= RESYNC_INTERVAL {
            self.resync();
        }
    }

    fn flip_now(&mut self, i: usize) {
        let step = if self.state.bits()[i] { -1 } else { 1 };
        for &(c, coeff) in &self.space.incidence[i] {
            let constraint = &self.space.constraints[c];
            let before = self.sums[c];
            self.sums[c] = before + step * coeff;
            self.penalty += hinge(constraint.lambda, constraint.bound, self.sums[c])
                - hinge(constraint.lambda, constraint.bound, before);
        }
        let d = self.state.flip_delta(i);
        self.state.apply_flip(self.space.model, i, d);
        if let Some((b, _)) = self.space.slot[i] {
            self.refresh_block(b);
        }
    }

    /// Recomputes fields, energy and penalties from the bits.
    pub fn resync(&mut self) {
        self.state.resync(self.space.model);
        self.recompute_constraints();
        self.since_resync = 0;
    }

    /// Tracked total minus scratch total.
    pub fn drift(&self) -> f64 {
        let scratch = evaluate_total(self.space.model, self.space.constraints, self.bits()).expect("sizes agree");
        self.total_energy() - scratch
    }

    fn choose_accepted<R: Rng + ?Sized>(&mut self, offset: f64, increment: f64, rng: &mut R) -> StepOutcome {
        let acceptances = self.accepted.len();
        if acceptances == 0 {
            return StepOutcome { accepted: None, offset: offset + increment, acceptances };
        }
        let mv = self.accepted[rng.gen_range(0..acceptances)];
        self.apply(mv);
        StepOutcome { accepted: Some(mv), offset: 0.0, acceptances }
    }

    /// One parallel-trial step over all single-bit flips.
    pub fn parallel_trial_step<R: Rng + ?Sized>(
        &mut self,
        temperature: f64,
        offset: f64,
        increment: f64,
        rng: &mut R,
    ) -> StepOutcome {
        debug_assert!(temperature > 0.0);
        self.accepted.clear();
        for i in 0..self.state.bits().len() {
            if accepts(self.flip_delta(i) - offset, temperature, rng) {
                self.accepted.push(Move::Flip(i));
            }
        }
        self.choose_accepted(offset, increment, rng)
    }

    /// One parallel-trial step over all in-block relocations of set bits.
    ///
    /// Fails when some block is not one-hot.
    pub fn structured_onehot_step<R: Rng + ?Sized>(
        &mut self,
        temperature: f64,
        offset: f64,
        increment: f64,
        rng: &mut R,
    ) -> Result<StepOutcome> {
        debug_assert!(temperature > 0.0);
        self.require_one_hot()?;
        self.accepted.clear();
        let space = self.space;
        for (b, members) in space.blocks.iter().enumerate() {
            let from = self.hot[b].expect("checked one-hot");
            let k = members.len();
            let clear = members[from];
            let couplings = &space.intra[b][from * k..(from + 1) * k];
            for (to, &set) in members.iter().enumerate() {
                if to == from {
                    continue;
                }
                let d = self.swap_delta_with(clear, set, couplings[to]);
                if accepts(d - offset, temperature, rng) {
                    self.accepted.push(Move::Swap { clear, set });
                }
            }
        }
        Ok(self.choose_accepted(offset, increment, rng))
    }

    /// One Metropolis trial of a uniformly chosen single flip.
    pub fn sequential_sa_step<R: Rng + ?Sized>(&mut self, temperature: f64, rng: &mut R) -> StepOutcome {
        let n = self.state.bits().len();
        if n == 0 {
            return StepOutcome { accepted: None, offset: 0.0, acceptances: 0 };
        }
        let mv = Move::Flip(rng.gen_range(0..n));
        self.metropolis(mv, temperature, rng)
    }

    /// One Metropolis trial of a uniformly chosen in-block relocation.
    pub fn sequential_onehot_step<R: Rng + ?Sized>(&mut self, temperature: f64, rng: &mut R) -> Result<StepOutcome> {
        self.require_one_hot()?;
        let b = rng.gen_range(0..self.space.blocks.len());
        let members = &self.space.blocks[b];
        if members.len() < 2 {
            return Ok(StepOutcome { accepted: None, offset: 0.0, acceptances: 0 });
        }
        let from = self.hot[b].expect("checked one-hot");
        let mut to = rng.gen_range(0..members.len() - 1);
        if to >= from {
            to += 1;
        }
        let mv = Move::Swap { clear: members[from], set: members[to] };
        Ok(self.metropolis(mv, temperature, rng))
    }

    fn metropolis<R: Rng + ?Sized>(&mut self, mv: Move, temperature: f64, rng: &mut R) -> StepOutcome {
        if accepts(self.move_delta(mv), temperature, rng) {
            self.apply(mv);
            StepOutcome { accepted: Some(mv), offset: 0.0, acceptances: 1 }
        } else {
            StepOutcome { accepted: None, offset: 0.0, acceptances: 0 }
        }
    }

    fn require_one_hot(&self) -> Result<()> {
        if !self.space.has_blocks() {
            return Err(Error::InvalidParameter("structured moves need a block structure"));
        }
        match self.hot.iter().position(Option::is_none) {
            Some(block) => Err(Error::NotOneHot { block }),
            None => Ok(()),
        }
    }

    /// Largest `|Δ|` over `probes` random candidate moves at the current state.
    fn probe_max_delta<R: Rng + ?Sized>(&self, probes: usize, rng: &mut R) -> f64 {
        let n = self.bits().len();
        if n == 0 {
            return 0.0;
        }
        let structured = self.space.has_blocks() && self.is_one_hot() && self.space.blocks.iter().any(|b| b.len() > 1);
        let mut max = 0.0f64;
        for _ in 0..probes {
            let d = if structured {
                let b = rng.gen_range(0..self.space.blocks.len());
                let members = &self.space.blocks[b];
                if members.len() < 2 {
                    continue;
                }
                let from = self.hot[b].expect("one-hot");
                let mut to = rng.gen_range(0..members.len() - 1);
                if to >= from {
                    to += 1;
                }
                self.move_delta(Move::Swap { clear: members[from], set: members[to] })
            } else {
                self.flip_delta(rng.gen_range(0..n))
            };
            max = max.max(d.abs());
        }
        max
    }
}

/// Metropolis test on an energy excess.
#[inline]
fn accepts<R: Rng + ?Sized>(excess: f64, temperature: f64, rng: &mut R) -> bool {
    if excess <= 0.0 {
        return true;
    }
    let z = excess / temperature;
    if z > MAX_EXPONENT {
        return false;
    }
    rng.gen::<f64>() < libm::exp(-z)
}

/// One trace sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub restart: usize,
    pub step: usize,
    pub temperature: f64,
    pub offset: f64,
    pub energy: f64,
    pub best_energy: f64,
}

/// Outcome of a single restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub restart: usize,
    pub best_bits: Vec<bool>,
    /// Scratch total energy of `best_bits`.
    pub best_energy: f64,
    /// Scratch total energy of the state at the end of the run.
    pub final_energy: f64,
    /// Tracked total energy at the end of the run (before any recomputation).
    pub final_energy_tracked: f64,
    pub accepted_moves: u64,
    pub steps_completed: usize,
    pub timed_out: bool,
    pub trace: Vec<TraceSample>,
}

/// Per-restart summary kept in [`AnnealResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartStats {
    pub final_energy: f64,
    pub final_energy_tracked: f64,
    pub best_energy: f64,
    pub accepted_moves: u64,
    pub steps_completed: usize,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    pub best_bits: Vec<bool>,
    /// Total energy (QUBO plus hinges, plus one-hot penalty in penalty mode).
    pub best_total_energy: f64,
    pub best_restart: usize,
    pub per_restart: Vec<RestartStats>,
    pub offset_trace: Vec<TraceSample>,
    /// Set when the time limit stopped at least one restart early.
    pub timed_out: bool,
}

/// A fully resolved annealing run, ready to execute restart by restart.
///
/// `anneal` runs the restarts in order; callers wanting concurrency can run
/// [`Plan::run_restart`] for each index on separate threads and merge the
/// outcomes with [`Plan::finish`], which yields the same result.
#[derive(Debug, Clone)]
pub struct Plan<'a> {
    penalized: Option<QuboModel>,
    model: &'a QuboModel,
    constraints: &'a [InequalityConstraint],
    blocks: Option<Vec<Vec<usize>>>,
    pub schedule: Schedule,
    pub params: AnnealParams,
    pub offset_increment: f64,
    structured: bool,
}

impl<'a> Plan<'a> {
    pub fn new(
        model: &'a QuboModel,
        constraints: &'a [InequalityConstraint],
        schedule: Schedule,
        params: AnnealParams,
        groups: Option<&[Vec<usize>]>,
    ) -> Result<Self> {
        params.validate()?;
        Schedule::new(schedule.kind, schedule.t_start, schedule.t_end, schedule.steps)?;
        let structured = params.one_hot_mode == OneHotMode::StructuredMoves && groups.is_some();
        let penalized = match (params.one_hot_mode, groups) {
            (OneHotMode::Penalty, Some(blocks)) => {
                let strength = params.one_hot_penalty.unwrap_or_else(|| 2.0 * model.max_abs_row_sum());
                Some(model.with_one_hot_penalty(blocks, strength)?)
            }
            _ => None,
        };
        let effective = penalized.as_ref().unwrap_or(model);
        let offset_increment = params.offset_increment.unwrap_or_else(|| default_offset_increment(effective));
        let plan = Self {
            penalized,
            model,
            constraints,
            blocks: groups.map(<[_]>::to_vec),
            schedule,
            params,
            offset_increment,
            structured,
        };
        // Validates indices and block layout once up front.
        plan.space()?;
        Ok(plan)
    }

    /// The model actually annealed (with the one-hot penalty in penalty mode).
    pub fn model(&self) -> &QuboModel {
        self.penalized.as_ref().unwrap_or(self.model)
    }

    pub fn space(&self) -> Result<SearchSpace<'_>> {
        let blocks = if self.structured { self.blocks.as_deref() } else { None };
        SearchSpace::new(self.model(), self.constraints, blocks)
    }

    /// The common starting state in shared mode.
    pub fn shared_start(&self) -> Vec<bool> {
        let mut bits = vec![false; self.model.num_vars()];
        if self.structured {
            for (b, members) in self.blocks.iter().flatten().enumerate() {
                bits[members[b % members.len()]] = true;
            }
        }
        bits
    }

    fn random_start(&self, rng: &mut Xoshiro256PlusPlus) -> Vec<bool> {
        let n = self.model.num_vars();
        if self.structured {
            let mut bits = vec![false; n];
            for members in self.blocks.iter().flatten() {
                bits[members[rng.gen_range(0..members.len())]] = true;
            }
            bits
        } else {
            (0..n).map(|_| rng.gen()).collect()
        }
    }

    /// Independent stream for restart `r`: the seeded generator jumped `r + 1` times.
    pub fn restart_rng(&self, r: usize) -> Xoshiro256PlusPlus {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(self.params.seed);
        for _ in 0..=r {
            rng.jump();
        }
        rng
    }

    /// Walker positioned at the shared start, built once and cloned per restart.
    pub fn shared_walker<'s, 'm>(&self, space: &'s SearchSpace<'m>) -> Result<Walker<'s, 'm>> {
        let walker = Walker::new(space, self.shared_start())?;
        if self.structured {
            walker.require_one_hot()?;
        }
        Ok(walker)
    }

    /// Runs restart `r`. `shared` must come from [`Plan::shared_walker`] on `space`.
    pub fn run_restart<'s, 'm, C: Clock + ?Sized>(
        &self,
        space: &'s SearchSpace<'m>,
        shared: &Walker<'s, 'm>,
        r: usize,
        clock: &C,
    ) -> Result<RestartOutcome> {
        let mut rng = self.restart_rng(r);
        let mut walker = match self.params.initial_state {
            InitialState::Shared => shared.clone(),
            InitialState::RandomPerRestart => Walker::new(space, self.random_start(&mut rng))?,
        };
        let mut best_total = walker.total_energy();
        let mut best_bits = walker.bits().to_vec();
        let mut offset = 0.0;
        let mut accepted_moves = 0u64;
        let mut steps_completed = 0;
        let mut timed_out = false;
        let mut trace = Vec::new();
        let sweep = if self.structured { space.blocks.len() } else { walker.bits().len() };
        for step in 0..self.schedule.steps {
            if step % CLOCK_INTERVAL == 0 {
                if let Some(limit) = self.params.time_limit_sec {
                    if clock.elapsed_secs() >= limit {
                        timed_out = true;
                        break;
                    }
                }
            }
            let t = self.schedule.temperature(step);
            match self.params.engine {
                Engine::ParallelTrial => {
                    let outcome = if self.structured {
                        walker.structured_onehot_step(t, offset, self.offset_increment, &mut rng)?
                    } else {
                        walker.parallel_trial_step(t, offset, self.offset_increment, &mut rng)
                    };
                    offset = outcome.offset;
                    if outcome.accepted.is_some() {
                        accepted_moves += 1;
                        if walker.total_energy() < best_total {
                            best_total = walker.total_energy();
                            best_bits.copy_from_slice(walker.bits());
                        }
                    }
                }
                Engine::Sequential => {
                    for _ in 0..sweep {
                        let outcome = if self.structured {
                            walker.sequential_onehot_step(t, &mut rng)?
                        } else {
                            walker.sequential_sa_step(t, &mut rng)
                        };
                        if outcome.accepted.is_some() {
                            accepted_moves += 1;
                            if walker.total_energy() < best_total {
                                best_total = walker.total_energy();
                                best_bits.copy_from_slice(walker.bits());
                            }
                        }
                    }
                }
            }
            steps_completed += 1;
            if let Some(every) = self.params.trace_every {
                if step % every == 0 || step + 1 == self.schedule.steps {
                    trace.push(TraceSample {
                        restart: r,
                        step,
                        temperature: t,
                        offset,
                        energy: walker.total_energy(),
                        best_energy: best_total,
                    });
                }
            }
        }
        let model = self.model();
        Ok(RestartOutcome {
            restart: r,
            best_energy: evaluate_total(model, self.constraints, &best_bits)?,
            final_energy: evaluate_total(model, self.constraints, walker.bits())?,
            final_energy_tracked: walker.total_energy(),
            best_bits,
            accepted_moves,
            steps_completed,
            timed_out,
            trace,
        })
    }

    /// Merges restart outcomes; ties on energy go to the lowest restart index.
    pub fn finish(&self, mut outcomes: Vec<RestartOutcome>) -> AnnealResult {
        outcomes.sort_by_key(|o| o.restart);
        let best = outcomes
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, f64)>, (i, o)| match acc {
                Some((_, e)) if e <= o.best_energy => acc,
                _ => Some((i, o.best_energy)),
            })
            .map_or(0, |(i, _)| i);
        let per_restart = outcomes
            .iter()
            .map(|o| RestartStats {
                final_energy: o.final_energy,
                final_energy_tracked: o.final_energy_tracked,
                best_energy: o.best_energy,
                accepted_moves: o.accepted_moves,
                steps_completed: o.steps_completed,
                timed_out: o.timed_out,
            })
            .collect();
        let timed_out = outcomes.iter().any(|o| o.timed_out);
        let best_restart = outcomes[best].restart;
        let best_total_energy = outcomes[best].best_energy;
        let offset_trace = outcomes.iter_mut().flat_map(|o| core::mem::take(&mut o.trace)).collect();
        let best_bits = core::mem::take(&mut outcomes[best].best_bits);
        AnnealResult { best_bits, best_total_energy, best_restart, per_restart, offset_trace, timed_out }
    }
}

/// `0.1 × mean |W_ij|` over stored couplings, falling back to linear terms for
/// models without couplings.
pub fn default_offset_increment(model: &QuboModel) -> f64 {
    let quad = model.mean_abs_coupling();
    if quad > 0.0 {
        return 0.1 * quad;
    }
    let nonzero: Vec<f64> = model.linear().iter().filter(|h| **h != 0.0).map(|h| h.abs()).collect();
    if nonzero.is_empty() {
        0.0
    } else {
        0.1 * nonzero.iter().sum::<f64>() / nonzero.len() as f64
    }
}

/// Runs every restart in order and keeps the best state seen.
///
/// `groups` lists one-hot blocks; it is required for structured moves and
/// otherwise used to expand the one-hot penalty in penalty mode.
pub fn anneal<C: Clock + ?Sized>(
    model: &QuboModel,
    constraints: &[InequalityConstraint],
    schedule: &Schedule,
    params: &AnnealParams,
    groups: Option<&[Vec<usize>]>,
    clock: &C,
) -> Result<AnnealResult> {
    let plan = Plan::new(model, constraints, *schedule, params.clone(), groups)?;
    let space = plan.space()?;
    let shared = plan.shared_walker(&space)?;
    let outcomes =
        (0..params.restarts).map(|r| plan.run_restart(&space, &shared, r, clock)).collect::<Result<Vec<_>>>()?;
    Ok(plan.finish(outcomes))
}
