//! Graph readers and writers.
//!
//! Two text formats are understood:
//!
//! * edge lists: whitespace-separated `u v [w]` per line, `#` comments,
//!   non-negative integer node ids, weight 1 when omitted. Repeated pairs
//!   are merged by summing their weights. A `# nodes N` comment raises the
//!   node count to at least `N`, which keeps isolated trailing nodes.
//! * electrical line tables: CSV with header `from_bus,to_bus,r_ohm,x_ohm`.
//!   Each line becomes an edge of weight `1/|r + jx|`. Bus ids are mapped to
//!   dense indices in order of first appearance, and only the first of
//!   several parallel lines between the same pair of buses is kept.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use danneal_core::graph::Graph;
use serde::Deserialize;

use crate::error::{Error, Result};

/// A graph together with the external identifier of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub graph: Graph,
    /// `labels[i]` is the identifier node `i` had in the source.
    pub labels: Vec<String>,
}

impl LabeledGraph {
    /// Labels each node by its own index.
    pub fn unlabeled(graph: Graph) -> Self {
        let labels = (0..graph.num_nodes()).map(|i| i.to_string()).collect();
        Self { graph, labels }
    }
}

pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let body = line.trim();
        if let Some(comment) = body.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix("nodes ").and_then(|c| c.trim().parse::<usize>().ok()) {
                n = n.max(count);
            }
            continue;
        }
        if body.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: lineno, message };
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(format!("expected `u v [w]`, got {} fields", fields.len())));
        }
        let node = |s: &str| s.parse::<usize>().map_err(|_| parse_err(format!("invalid node id `{s}`")));
        let (u, v) = (node(fields[0])?, node(fields[1])?);
        let w = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| parse_err(format!("invalid weight `{s}`")))?,
            None => 1.0,
        };
        if u == v {
            return Err(parse_err(format!("self-loop on node {u}")));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(parse_err(format!("weight must be positive and finite, got {w}")));
        }
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    Ok(Graph::from_merged_edges(n, edges)?)
}

/// Writes `u v w` lines that [`load_edge_list`] reads back to the same graph.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes {}", graph.num_nodes())?;
    for &(u, v, w) in graph.edges() {
        // `{:?}` prints the shortest representation that round-trips.
        writeln!(out, "{u} {v} {w:?}")?;
    }
    Ok(())
}

/// One row of an electrical line table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ElectricalLine {
    pub from_bus: String,
    pub to_bus: String,
    pub r_ohm: f64,
    pub x_ohm: f64,
}

impl ElectricalLine {
    /// Admittance magnitude `1/|r + jx|`.
    pub fn weight(&self) -> f64 {
        1.0 / self.r_ohm.hypot(self.x_ohm)
    }
}

const ELECTRICAL_HEADER: [&str; 4] = ["from_bus", "to_bus", "r_ohm", "x_ohm"];

pub fn load_electrical_lines<R: std::io::Read>(reader: R) -> Result<LabeledGraph> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers()?.clone();
    if header.iter().ne(ELECTRICAL_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, got `{}`",
                ELECTRICAL_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut kept: HashMap<(usize, usize), ()> = HashMap::new();
    let mut edges = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: ElectricalLine =
            record.deserialize(Some(&header)).map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let bad = |message: String| Error::Parse { line, message };
        if !(row.r_ohm.is_finite() && row.x_ohm.is_finite()) || row.r_ohm < 0.0 {
            return Err(bad("impedance must be finite with r >= 0".into()));
        }
        if row.r_ohm == 0.0 && row.x_ohm == 0.0 {
            return Err(bad(format!("zero impedance between buses {} and {}", row.from_bus, row.to_bus)));
        }
        if row.from_bus == row.to_bus {
            return Err(bad(format!("line connects bus {} to itself", row.from_bus)));
        }
        let mut id = |bus: &str| {
            *index.entry(bus.to_owned()).or_insert_with(|| {
                labels.push(bus.to_owned());
                labels.len() - 1
            })
        };
        let (u, v) = (id(&row.from_bus), id(&row.to_bus));
        if kept.insert((u.min(v), u.max(v)), ()).is_none() {
            edges.push((u, v, row.weight()));
        }
    }
    let graph = Graph::new(labels.len(), edges)?;
    Ok(LabeledGraph { graph, labels })
}

/// Reads one positive integer per line; blank lines and `#` comments are skipped.
pub fn load_numbers<R: BufRead>(reader: R) -> Result<Vec<u64>> {
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        match body.parse::<u64>() {
            Ok(v) if v > 0 => values.push(v),
            _ => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected a positive integer, got `{body}`"),
                })
            }
        }
    }
    Ok(values)
}
