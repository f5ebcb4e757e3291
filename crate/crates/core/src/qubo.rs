//! QUBO models, tracked bit states and the Ising conversion.
//!
//! Energies use the full symmetric bilinear form
//!
//! ```text
//! E(x) = offset + Σ_i h_i x_i + Σ_{i≠j} W_ij x_i x_j
//!      = offset + Σ_i h_i x_i + Σ_{i<j} 2 W_ij x_i x_j
//! ```
//!
//! with `W` stored once per unordered pair. Diagonal entries never appear in
//! `W`: because `x² = x` they are folded into `h` when the model is built.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Immutable QUBO model over `n` binary variables.
///
/// Couplings are stored in compressed rows holding both orientations of every
/// pair, so that a flip touches only the neighbours of the flipped variable.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    n: usize,
    linear: Vec<f64>,
    offset: f64,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl QuboModel {
    /// Assembles a model from loose terms.
    ///
    /// Duplicate `(i, j)` entries (in either orientation) are summed, `(i, i)`
    /// quadratic entries are added to the linear term of `i`, and pairs that
    /// cancel to exactly zero are dropped.
    pub fn new<Q, L>(n: usize, quadratic: Q, linear: L, offset: f64) -> Result<Self>
    where
        Q: IntoIterator<Item = (usize, usize, f64)>,
        L: IntoIterator<Item = (usize, f64)>,
    {
        if !offset.is_finite() {
            return Err(Error::NonFinite { what: "offset" });
        }
        let mut lin = vec![0.0; n];
        for (i, c) in linear {
            check_index(i, n)?;
            check_finite(c)?;
            lin[i] += c;
        }
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, c) in quadratic {
            check_index(i, n)?;
            check_index(j, n)?;
            check_finite(c)?;
            if i == j {
                lin[i] += c;
            } else {
                pairs.push((i.min(j), i.max(j), c));
            }
        }
        pairs.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, j, c) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += c,
                _ => merged.push((i, j, c)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        if lin.iter().any(|c| !c.is_finite()) || merged.iter().any(|t| !t.2.is_finite()) {
            return Err(Error::NonFinite { what: "coefficient sum" });
        }
        Ok(Self::from_sorted_pairs(n, lin, offset, &merged))
    }

    /// `pairs` must be sorted, deduplicated, with `i < j` and non-zero values.
    fn from_sorted_pairs(n: usize, linear: Vec<f64>, offset: f64, pairs: &[(usize, usize, f64)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(i, j, _) in pairs {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        for d in &degree {
            row_start.push(row_start.last().unwrap() + d);
        }
        let nnz = row_start[n];
        let mut cols = vec![0; nnz];
        let mut vals = vec![0.0; nnz];
        let mut fill = row_start[..n].to_vec();
        // Iterating pairs in (i, j) order keeps every row sorted by column:
        // row r receives its "lower" partners (as j) before its "upper" ones.
        for &(i, j, c) in pairs {
            cols[fill[j]] = i;
            vals[fill[j]] = c;
            fill[j] += 1;
        }
        for &(i, j, c) in pairs {
            cols[fill[i]] = j;
            vals[fill[i]] = c;
            fill[i] += 1;
        }
        Self { n, linear, offset, row_start, cols, vals }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Number of stored unordered pairs.
    pub fn num_pairs(&self) -> usize {
        self.cols.len() / 2
    }

    /// Coupling `W_ij`; symmetric, zero on the diagonal and for absent pairs.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j >= self.n || i == j {
            return 0.0;
        }
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Neighbours of `i` with their couplings, sorted by neighbour index.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_start[i]..self.row_start[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    /// Every stored pair once, as `(i, j, W_ij)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).filter(move |(&j, _)| j > i).map(move |(&j, &w)| (i, j, w))
        })
    }

    /// Mean absolute value over stored quadratic coefficients (0 when there are none).
    pub fn mean_abs_coupling(&self) -> f64 {
        if self.vals.is_empty() {
            return 0.0;
        }
        self.vals.iter().map(|v| v.abs()).sum::<f64>() / self.vals.len() as f64
    }

    /// `max_i Σ_j |W_ij|`.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Total energy of `bits`, computed from scratch.
    pub fn energy(&self, bits: &[bool]) -> Result<f64> {
        check_len(bits, self.n)?;
        let mut e = self.offset;
        for i in (0..self.n).filter(|&i| bits[i]) {
            let (cols, vals) = self.row(i);
            let mut acc = self.linear[i];
            for (&j, &w) in cols.iter().zip(vals) {
                if bits[j] {
                    acc += w;
                }
            }
            e += acc;
        }
        Ok(e)
    }

    /// Local field `h_i + 2 Σ_j W_ij x_j`, the energy change of raising `x_i`.
    pub fn local_field(&self, bits: &[bool], i: usize) -> f64 {
        let (cols, vals) = self.row(i);
        let mut f = self.linear[i];
        for (&j, &w) in cols.iter().zip(vals) {
            if bits[j] {
                f += 2.0 * w;
            }
        }
        f
    }

    /// Returns a copy of this model with `strength · Σ_b (Σ_{v∈b} x_v − 1)²`
    /// expanded into it for each block `b`.
    pub fn with_one_hot_penalty(&self, blocks: &[Vec<usize>], strength: f64) -> Result<Self> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidParameter("one-hot penalty must be finite and non-negative"));
        }
        let mut quad: Vec<(usize, usize, f64)> = self.pairs().collect();
        let mut lin: Vec<(usize, f64)> = self.linear.iter().copied().enumerate().collect();
        let mut offset = self.offset;
        // (Σx − 1)² = Σx + 2Σ_{a<b} x_a x_b − 2Σx + 1 for binary x.
        for block in blocks {
            for (a, &u) in block.iter().enumerate() {
                check_index(u, self.n)?;
                lin.push((u, -strength));
                for &v in &block[a + 1..] {
                    quad.push((u, v, strength));
                }
            }
            offset += strength;
        }
        Self::new(self.n, quad, lin, offset)
    }
}

/// Bit assignment together with its tracked energy and local fields.
#[derive(Debug, Clone, PartialEq)]
pub struct BitState {
    bits: Vec<bool>,
    fields: Vec<f64>,
    energy: f64,
}

impl BitState {
    /// Builds a state, computing fields and energy from scratch.
    pub fn new(model: &QuboModel, bits: Vec<bool>) -> Result<Self> {
        check_len(&bits, model.n)?;
        let fields = (0..model.n).map(|i| model.local_field(&bits, i)).collect();
        let energy = model.energy(&bits)?;
        Ok(Self { bits, fields, energy })
    }

    pub fn zeros(model: &QuboModel) -> Self {
        Self { bits: vec![false; model.n], fields: model.linear.clone(), energy: model.offset }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Energy change from flipping bit `i`: `(1 − 2x_i) · f_i`.
    #[inline]
    pub fn flip_delta(&self, i: usize) -> f64 {
        if self.bits[i] {
            -self.fields[i]
        } else {
            self.fields[i]
        }
    }

    /// Flips bit `i`; `delta` must be the value returned by [`Self::flip_delta`].
    pub fn apply_flip(&mut self, model: &QuboModel, i: usize, delta: f64) {
        let sign = if self.bits[i] { -2.0 } else { 2.0 };
        self.bits[i] = !self.bits[i];
        let (cols, vals) = model.row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            self.fields[j] += sign * w;
        }
        self.energy += delta;
    }

    /// Largest absolute discrepancy between tracked and recomputed quantities,
    /// as `(energy error, field error)`.
    pub fn drift(&self, model: &QuboModel) -> (f64, f64) {
        let fresh = BitState::new(model, self.bits.clone()).expect("state matches model");
        let field_err = self.fields.iter().zip(&fresh.fields).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ((self.energy - fresh.energy).abs(), field_err)
    }

    /// Replaces tracked energy and fields with values recomputed from the bits.
    pub fn resync(&mut self, model: &QuboModel) {
        for i in 0..model.n {
            self.fields[i] = model.local_field(&self.bits, i);
        }
        self.energy = model.energy(&self.bits).expect("state matches model");
    }
}

/// Ising model `E(s) = −Σ_{i≠j} w_ij s_i s_j − Σ_i h_i s_i` over spins `s_i ∈ {−1, +1}`.
///
/// The coupling sum runs over ordered pairs, so each stored pair contributes
/// `−2 w_ij s_i s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    couplings: Vec<(usize, usize, f64)>,
    biases: Vec<f64>,
}

impl IsingModel {
    /// Couplings are merged per unordered pair; self-couplings are rejected.
    pub fn new(n: usize, couplings: impl IntoIterator<Item = (usize, usize, f64)>, biases: Vec<f64>) -> Result<Self> {
        check_len_of(biases.len(), n)?;
        if biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite { what: "bias" });
        }
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, w) in couplings {
            check_index(i, n)?;
            check_index(j, n)?;
            check_finite(w)?;
            if i == j {
                return Err(Error::InvalidParameter("Ising couplings must have a zero diagonal"));
            }
            pairs.push((i.min(j), i.max(j), w));
        }
        pairs.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(pairs.len());
        for (i, j, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += w,
                _ => merged.push((i, j, w)),
            }
        }
        Ok(Self { n, couplings: merged, biases })
    }

    pub fn num_spins(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.couplings.binary_search_by_key(&key, |&(a, b, _)| (a, b)).map(|p| self.couplings[p].2).unwrap_or(0.0)
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Energy of a spin configuration; `true` is spin up.
    pub fn energy(&self, spins: &[bool]) -> Result<f64> {
        check_len(spins, self.n)?;
        let s = |i: usize| if spins[i] { 1.0 } else { -1.0 };
        let mut e = 0.0;
        for &(i, j, w) in &self.couplings {
            e -= 2.0 * w * s(i) * s(j);
        }
        for (i, h) in self.biases.iter().enumerate() {
            e -= h * s(i);
        }
        Ok(e)
    }

    /// Equivalent QUBO under `b = (s + 1) / 2`; energies agree on every configuration.
    pub fn to_qubo(&self) -> QuboModel {
        let mut lin = vec![0.0; self.n];
        let mut offset = 0.0;
        let mut quad = Vec::with_capacity(self.couplings.len());
        // −2w s_i s_j with s = 2b − 1 gives −8w b_i b_j + 4w b_i + 4w b_j − 2w.
        for &(i, j, w) in &self.couplings {
            quad.push((i, j, -4.0 * w));
            lin[i] += 4.0 * w;
            lin[j] += 4.0 * w;
            offset -= 2.0 * w;
        }
        // −h s = −2h b + h.
        for (i, &h) in self.biases.iter().enumerate() {
            lin[i] -= 2.0 * h;
            offset += h;
        }
        QuboModel::new(self.n, quad, lin.into_iter().enumerate(), offset)
            .expect("finite Ising model converts to a finite QUBO")
    }
}

/// Free-function form of [`IsingModel::to_qubo`].
pub fn ising_to_qubo(ising: &IsingModel) -> QuboModel {
    ising.to_qubo()
}

pub(crate) fn check_index(i: usize, n: usize) -> Result<()> {
    if i < n {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index: i, len: n })
    }
}

fn check_finite(c: f64) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "coefficient" })
    }
}

pub(crate) fn check_len(bits: &[bool], n: usize) -> Result<()> {
    check_len_of(bits.len(), n)
}

fn check_len_of(actual: usize, expected: usize) -> Result<()> {
    if actual == expected {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
