//! Number partitioning and modularity-based graph partitioning as QUBOs.

use alloc::vec;
use alloc::vec::Vec;

use crate::anneal::InequalityConstraint;
use crate::graph::Graph;
use crate::qubo::{check_len, QuboModel};
use crate::{Error, Result};

/// A multiset of positive integers to split in two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberSet {
    values: Vec<u64>,
    total: u64,
}

impl NumberSet {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyNumberSet);
        }
        if let Some(index) = values.iter().position(|&v| v == 0) {
            return Err(Error::NonPositiveValue { index });
        }
        let total = values
            .iter()
            .try_fold(0u64, |acc, &v| acc.checked_add(v))
            .ok_or(Error::InvalidParameter("number set total overflows"))?;
        Ok(Self { values, total })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `c = Σ S_j`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// QUBO whose energy is exactly `D² = (c − 2 Σ S_j x_j)²`.
///
/// Coefficients are `h_i = 4 S_i (S_i − c)`, `W_ij = 4 S_i S_j` and offset
/// `c²`. They stay exact in `f64` while `c² < 2^53`.
pub fn build_number_partition(set: &NumberSet) -> QuboModel {
    let c = set.total as f64;
    let s: Vec<f64> = set.values.iter().map(|&v| v as f64).collect();
    let n = s.len();
    let linear = s.iter().enumerate().map(|(i, &si)| (i, 4.0 * si * (si - c)));
    let quadratic = (0..n).flat_map(|i| {
        let s = &s;
        (i + 1..n).map(move |j| (i, j, 4.0 * s[i] * s[j]))
    });
    QuboModel::new(n, quadratic, linear, c * c).expect("number partition coefficients are finite")
}

/// Sums of both sides of a split and their absolute difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumberSplit {
    pub sum_a: u64,
    pub sum_b: u64,
    pub d: u64,
}

/// Set bits go to side A.
pub fn decode_number_partition(set: &NumberSet, bits: &[bool]) -> Result<NumberSplit> {
    check_len(bits, set.len())?;
    let sum_a: u64 = set.values.iter().zip(bits).filter(|p| *p.1).map(|p| *p.0).sum();
    let sum_b = set.total - sum_a;
    Ok(NumberSplit { sum_a, sum_b, d: sum_a.abs_diff(sum_b) })
}

/// Dense modularity matrix `B_ij = (A_ij − γ k_i k_j / 2m) / 2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularityMatrix {
    n: usize,
    b: Vec<f64>,
    two_m: f64,
    gamma: f64,
}

impl ModularityMatrix {
    pub fn new(graph: &Graph, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let two_m = graph.total_weight_2m();
        if two_m <= 0.0 {
            return Err(Error::EmptyGraph);
        }
        let n = graph.num_nodes();
        let k = graph.degrees();
        let mut b = graph.adjacency();
        for i in 0..n {
            for j in 0..n {
                let cell = &mut b[i * n + j];
                *cell = (*cell - gamma * k[i] * k[j] / two_m) / two_m;
            }
        }
        Ok(Self { n, b, two_m, gamma })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.b[i * self.n..(i + 1) * self.n]
    }

    pub fn two_m(&self) -> f64 {
        self.two_m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `max_i Σ_j |B_ij|`.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

pub fn modularity_matrix(graph: &Graph, gamma: f64) -> Result<ModularityMatrix> {
    ModularityMatrix::new(graph, gamma)
}

/// Group label per node, each in `[0, k)`. Groups may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionAssignment {
    group_of: Vec<usize>,
    k: usize,
}

impl PartitionAssignment {
    pub fn new(group_of: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("group count must be at least 1"));
        }
        if let Some(&g) = group_of.iter().find(|&&g| g >= k) {
            return Err(Error::IndexOutOfRange { index: g, len: k });
        }
        Ok(Self { group_of, k })
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &g in &self.group_of {
            sizes[g] += 1;
        }
        sizes
    }

    pub fn empty_groups(&self) -> usize {
        self.group_sizes().iter().filter(|&&s| s == 0).count()
    }

    /// One-hot bit vector with node `i`, group `g` at index `i·k + g`.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.group_of.len() * self.k];
        for (i, &g) in self.group_of.iter().enumerate() {
            bits[i * self.k + g] = true;
        }
        bits
    }
}

/// Weighted modularity of `assign`, with resolution `gamma`.
///
/// Evaluated per community as `Σ_c [2 L_c / 2m − γ (K_c / 2m)²]`, where `L_c`
/// is the internal edge weight and `K_c` the total degree of community `c`.
pub fn modularity(graph: &Graph, assign: &PartitionAssignment, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if assign.group_of.len() != graph.num_nodes() {
        return Err(Error::LengthMismatch { expected: graph.num_nodes(), actual: assign.group_of.len() });
    }
    let two_m = graph.total_weight_2m();
    if two_m <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let groups = &assign.group_of;
    let mut internal = vec![0.0; assign.k];
    let mut degree = vec![0.0; assign.k];
    for &(u, v, w) in graph.edges() {
        if groups[u] == groups[v] {
            internal[groups[u]] += 2.0 * w;
        }
    }
    for (i, &k) in graph.degrees().iter().enumerate() {
        degree[groups[i]] += k;
    }
    Ok(internal.iter().zip(&degree).map(|(l, d)| l / two_m - gamma * (d / two_m) * (d / two_m)).sum())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("resolution must be finite and positive"))
    }
}

/// Graph partitioning into `k` groups by modularity maximisation.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionProblem {
    pub graph: Graph,
    pub k: usize,
    pub gamma: f64,
    /// One-hot penalty for penalty mode; `None` picks `2 · max_i Σ_j |B_ij|`.
    pub one_hot_penalty: Option<f64>,
    /// Weight of each "group is non-empty" hinge.
    pub nonempty_lambda: f64,
}

impl PartitionProblem {
    /// Defaults: `γ = 1`, `λ = 1`, automatic one-hot penalty.
    pub fn new(graph: Graph, k: usize) -> Self {
        Self { graph, k, gamma: 1.0, one_hot_penalty: None, nonempty_lambda: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("group count must be at least 1"));
        }
        check_gamma(self.gamma)?;
        if !(self.nonempty_lambda.is_finite() && self.nonempty_lambda >= 0.0) {
            return Err(Error::InvalidParameter("lambda must be finite and non-negative"));
        }
        if let Some(a) = self.one_hot_penalty {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::InvalidParameter("one-hot penalty must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// QUBO formulation of a [`PartitionProblem`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPartitionQubo {
    /// Energy is `−Q` on one-hot states.
    pub model: QuboModel,
    /// One `Σ_i x_ik ≥ 1` hinge per group.
    pub constraints: Vec<InequalityConstraint>,
    /// One-hot block of each node: variables `i·k .. i·k + k`.
    pub groups: Vec<Vec<usize>>,
    pub n: usize,
    pub k: usize,
    /// Penalty strength used when the one-hot rule is expanded into the QUBO.
    pub one_hot_penalty: f64,
}

impl GraphPartitionQubo {
    /// The objective with `A · Σ_i (Σ_k x_ik − 1)²` expanded into it.
    pub fn penalized_model(&self) -> QuboModel {
        self.model.with_one_hot_penalty(&self.groups, self.one_hot_penalty).expect("blocks index the model")
    }

    pub fn decode(&self, bits: &[bool]) -> Result<PartitionAssignment> {
        decode_partition(bits, self.n, self.k)
    }
}

/// Builds the one-hot QUBO: variable `(i, g)` sits at `i·k + g`, couplings
/// `W = −B_ij` link `(i, g)` and `(j, g)`, the diagonal `−B_ii` is linear.
pub fn build_graph_partition(problem: &PartitionProblem) -> Result<GraphPartitionQubo> {
    problem.validate()?;
    let b = ModularityMatrix::new(&problem.graph, problem.gamma)?;
    let n = b.num_nodes();
    let k = problem.k;
    let mut quad = Vec::with_capacity(n * (n.saturating_sub(1)) / 2 * k);
    let mut lin = Vec::with_capacity(n * k);
    for i in 0..n {
        for g in 0..k {
            lin.push((i * k + g, -b.get(i, i)));
        }
        for j in i + 1..n {
            let w = -b.get(i, j);
            if w != 0.0 {
                for g in 0..k {
                    quad.push((i * k + g, j * k + g, w));
                }
            }
        }
    }
    let model = QuboModel::new(n * k, quad, lin, 0.0)?;
    let constraints = (0..k)
        .map(|g| InequalityConstraint::new((0..n).map(|i| (i * k + g, 1)).collect(), 1, problem.nonempty_lambda))
        .collect::<Result<Vec<_>>>()?;
    let groups = (0..n).map(|i| (i * k..(i + 1) * k).collect()).collect();
    let one_hot_penalty = problem.one_hot_penalty.unwrap_or_else(|| 2.0 * b.max_abs_row_sum());
    Ok(GraphPartitionQubo { model, constraints, groups, n, k, one_hot_penalty })
}

/// Decodes a one-hot bit vector; blocks that are not one-hot are reported
/// through [`Error::Infeasible`].
pub fn decode_partition(bits: &[bool], n: usize, k: usize) -> Result<PartitionAssignment> {
    if k == 0 {
        return Err(Error::InvalidParameter("group count must be at least 1"));
    }
    check_len(bits, n * k)?;
    let mut group_of = Vec::with_capacity(n);
    let mut zero_hot = Vec::new();
    let mut multi_hot = Vec::new();
    for (i, block) in bits.chunks(k).enumerate() {
        let mut set = block.iter().enumerate().filter(|p| *p.1).map(|p| p.0);
        match (set.next(), set.next()) {
            (Some(g), None) => group_of.push(g),
            (None, _) => zero_hot.push(i),
            (Some(_), Some(_)) => multi_hot.push(i),
        }
    }
    if zero_hot.is_empty() && multi_hot.is_empty() {
        Ok(PartitionAssignment { group_of, k })
    } else {
        Err(Error::Infeasible { zero_hot, multi_hot })
    }
}

/// Mean weights of edges crossing groups versus edges inside groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryStats {
    pub boundary_mean: Option<f64>,
    pub interior_mean: Option<f64>,
    pub boundary_count: usize,
    pub interior_count: usize,
}

pub fn boundary_weight_stats(graph: &Graph, assign: &PartitionAssignment) -> Result<BoundaryStats> {
    let groups = assign.group_of();
    if groups.len() != graph.num_nodes() {
        return Err(Error::LengthMismatch { expected: graph.num_nodes(), actual: groups.len() });
    }
    let (mut bsum, mut isum, mut bcount, mut icount) = (0.0, 0.0, 0, 0);
    for &(u, v, w) in graph.edges() {
        if groups[u] == groups[v] {
            isum += w;
            icount += 1;
        } else {
            bsum += w;
            bcount += 1;
        }
    }
    let mean = |sum: f64, count: usize| (count > 0).then(|| sum / count as f64);
    Ok(BoundaryStats {
        boundary_mean: mean(bsum, bcount),
        interior_mean: mean(isum, icount),
        boundary_count: bcount,
        interior_count: icount,
    })
}
