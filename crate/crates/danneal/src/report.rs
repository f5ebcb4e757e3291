//! Run reports and their JSON and CSV encodings.
//!
//! A [`Report`] holds a deterministic `run` block and a separate `timing`
//! block. Two runs with the same inputs and seed produce byte-identical `run`
//! blocks; wall-clock figures appear only under `timing`.

use std::fmt;
use std::io::Write;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub run: Run,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Run {
    Numpart(NumpartRun),
    Graphpart(PartitionRun),
    Sweepk(PartitionRun),
}

/// Solver settings as requested on the command line, before defaults apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: String,
    pub engine: String,
    pub restarts: Option<usize>,
    pub steps: Option<usize>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub seed: u64,
    pub offset_increment: Option<f64>,
    pub time_limit_sec: Option<f64>,
}

/// Settings a solve actually used, plus its counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    pub restarts: usize,
    pub steps: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub offset_increment: f64,
    pub best_restart: usize,
    pub steps_completed: usize,
    pub accepted_moves: u64,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumpartRun {
    pub config: RunConfig,
    /// Where the numbers came from: a path or `generate(n, max, seed)`.
    pub source: String,
    pub values: Vec<u64>,
    /// `1` marks values in the first subset, one character per value.
    pub side: String,
    pub sum_a: u64,
    pub sum_b: u64,
    pub d: u64,
    pub best_energy: f64,
    pub expect_optimal: bool,
    /// `d <= 1`.
    pub optimal: bool,
    pub solver: SolveMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub source: String,
    pub n: usize,
    pub edge_count: usize,
    pub total_weight_2m: f64,
    pub min_weight: Option<f64>,
    pub max_weight: Option<f64>,
    pub mean_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRun {
    pub config: RunConfig,
    pub one_hot_mode: String,
    pub gamma: f64,
    pub lambda: f64,
    pub graph: GraphInfo,
    /// One entry per group count, in ascending order.
    pub results: Vec<KResult>,
    /// Feasible group count with the highest modularity.
    pub best_k: Option<usize>,
    pub best_modularity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub boundary_mean: Option<f64>,
    pub interior_mean: Option<f64>,
    pub boundary_count: usize,
    pub interior_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KResult {
    pub k: usize,
    pub feasible: bool,
    pub best_energy: f64,
    pub modularity: Option<f64>,
    pub group_sizes: Option<Vec<usize>>,
    pub boundary: Option<Boundary>,
    pub assignment: Option<Assignment>,
    /// Nodes with no group bit set, when infeasible.
    pub zero_hot: Vec<usize>,
    /// Nodes with several group bits set, when infeasible.
    pub multi_hot: Vec<usize>,
    pub solver: SolveMeta,
}

/// Node label to group index, serialized as a JSON object in node order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment(pub Vec<(String, usize)>);

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (label, group) in &self.0 {
            map.serialize_entry(label, group)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Ordered;

        impl<'de> Visitor<'de> for Ordered {
            type Value = Assignment;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from node label to group index")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Assignment, A::Error> {
                let mut entries = Vec::with_capacity(access.size_hint().unwrap_or(0));
                while let Some(entry) = access.next_entry()? {
                    entries.push(entry);
                }
                Ok(Assignment(entries))
            }
        }

        deserializer.deserialize_map(Ordered)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub solves: Vec<SolveTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTiming {
    pub k: Option<usize>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Report {
    pub fn new(run: Run, timing: Timing) -> Self {
        Self { schema_version: SCHEMA_VERSION, run, timing }
    }

    /// JSON of the `run` block alone.
    pub fn deterministic_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.run)?)
    }
}

pub const NUMPART_CSV_HEADER: [&str; 6] = ["n", "sum_a", "sum_b", "d", "best_energy", "seconds"];
pub const SWEEP_CSV_HEADER: [&str; 5] = ["k", "modularity", "best_energy", "feasible", "seconds"];

/// Writes `report` with a trailing newline.
pub fn emit_report<W: Write>(report: &Report, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        Format::Csv => write_csv(report, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn write_csv<W: Write>(report: &Report, out: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    let seconds = |k: Option<usize>| {
        report.timing.solves.iter().find(|s| s.k == k).map_or(String::new(), |s| s.seconds.to_string())
    };
    match &report.run {
        Run::Numpart(run) => {
            csv.write_record(NUMPART_CSV_HEADER)?;
            csv.write_record([
                run.values.len().to_string(),
                run.sum_a.to_string(),
                run.sum_b.to_string(),
                run.d.to_string(),
                run.best_energy.to_string(),
                seconds(None),
            ])?;
        }
        Run::Graphpart(run) | Run::Sweepk(run) => {
            csv.write_record(SWEEP_CSV_HEADER)?;
            for r in &run.results {
                csv.write_record([
                    r.k.to_string(),
                    r.modularity.map_or(String::new(), |q| q.to_string()),
                    r.best_energy.to_string(),
                    r.feasible.to_string(),
                    seconds(Some(r.k)),
                ])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}
