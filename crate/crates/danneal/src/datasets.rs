//! Reference graphs shipped with the crate, parsed through the public loaders.

use std::fmt;
use std::str::FromStr;

use danneal_core::graph::Graph;

use crate::io::{load_edge_list, load_electrical_lines, LabeledGraph};

const KARATE: &str = include_str!("../../../data/karate.edges");
const IEEE33: &str = include_str!("../../../data/ieee33_lines.csv");
const IEEE118: &str = include_str!("../../../data/ieee118_lines.csv");

/// Zachary's karate club with the original interaction counts as weights.
pub fn karate_club() -> Graph {
    load_edge_list(KARATE.as_bytes()).expect("bundled karate data is valid")
}

/// 33-bus radial distribution feeder.
pub fn ieee33() -> LabeledGraph {
    load_electrical_lines(IEEE33.as_bytes()).expect("bundled 33-bus data is valid")
}

/// 118-bus transmission system, transformers included.
pub fn ieee118() -> LabeledGraph {
    load_electrical_lines(IEEE118.as_bytes()).expect("bundled 118-bus data is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Karate,
    Ieee33,
    Ieee118,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Karate, Builtin::Ieee33, Builtin::Ieee118];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Karate => "karate",
            Builtin::Ieee33 => "ieee33",
            Builtin::Ieee118 => "ieee118",
        }
    }

    pub fn load(self) -> LabeledGraph {
        match self {
            Builtin::Karate => LabeledGraph::unlabeled(karate_club()),
            Builtin::Ieee33 => ieee33(),
            Builtin::Ieee118 => ieee118(),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown dataset `{s}` (expected karate, ieee33 or ieee118)"))
    }
}
