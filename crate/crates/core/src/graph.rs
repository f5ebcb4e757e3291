//! Weighted undirected simple graphs.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Weighted undirected simple graph with cached weighted degrees.
///
/// Edges are stored as `(u, v, w)` with `u < v`, sorted, no duplicates,
/// and every weight finite and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    degrees: Vec<f64>,
    two_m: f64,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, repeated pairs and bad weights.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v, w) in edges {
            list.push(normalize(n, u, v, w)?);
        }
        list.sort_by_key(|&(u, v, _)| (u, v));
        if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0 && p[0].1 == p[1].1) {
            return Err(Error::DuplicateEdge { u: pair[0].0, v: pair[0].1 });
        }
        Ok(Self::from_normalized(n, list))
    }

    /// Builds a graph, summing the weights of repeated pairs.
    pub fn from_merged_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v, w) in edges {
            list.push(normalize(n, u, v, w)?);
        }
        list.sort_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(list.len());
        for (u, v, w) in list {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => merged.push((u, v, w)),
            }
        }
        if merged.iter().any(|e| !e.2.is_finite()) {
            return Err(Error::NonFinite { what: "merged edge weight" });
        }
        Ok(Self::from_normalized(n, merged))
    }

    fn from_normalized(n: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        let mut degrees = vec![0.0; n];
        for &(u, v, w) in &edges {
            degrees[u] += w;
            degrees[v] += w;
        }
        let two_m = degrees.iter().sum();
        Self { n, edges, degrees, two_m }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Weighted degrees `k_i`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `2m = Σ_i k_i`.
    pub fn total_weight_2m(&self) -> f64 {
        self.two_m
    }

    /// Dense adjacency matrix, row-major `n × n`.
    pub fn adjacency(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n * self.n];
        for &(u, v, w) in &self.edges {
            a[u * self.n + v] = w;
            a[v * self.n + u] = w;
        }
        a
    }

    pub fn stats(&self) -> GraphStats {
        let weights = self.edges.iter().map(|e| e.2);
        let (min, max) = weights.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| (lo.min(w), hi.max(w)));
        let count = self.edges.len();
        let mean = (count > 0).then(|| weights.sum::<f64>() / count as f64);
        GraphStats {
            n: self.n,
            edge_count: count,
            total_weight_2m: self.two_m,
            min_weight: (count > 0).then_some(min),
            max_weight: (count > 0).then_some(max),
            mean_weight: mean,
        }
    }
}

/// Summary of a graph's size and weights; weight fields are `None` without edges.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub n: usize,
    pub edge_count: usize,
    pub total_weight_2m: f64,
    pub min_weight: Option<f64>,
    pub max_weight: Option<f64>,
    pub mean_weight: Option<f64>,
}

pub fn graph_stats(graph: &Graph) -> GraphStats {
    graph.stats()
}

fn normalize(n: usize, u: usize, v: usize, w: f64) -> Result<(usize, usize, f64)> {
    for node in [u, v] {
        if node >= n {
            return Err(Error::IndexOutOfRange { index: node, len: n });
        }
    }
    if u == v {
        return Err(Error::SelfLoop { node: u });
    }
    if !w.is_finite() {
        return Err(Error::NonFinite { what: "edge weight" });
    }
    if w <= 0.0 {
        return Err(Error::NonPositiveWeight { u, v });
    }
    Ok((u.min(v), u.max(v), w))
}
