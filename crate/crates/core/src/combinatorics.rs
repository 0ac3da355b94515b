//! Common neighbourhoods in bipartite graphs.
//!
//! Adjacency rows are bit-packed so that `|N(ℓ) ∩ N(ℓ')|` is a word-wise
//! AND and popcount.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::nof::{NofTarget, Protocol, Transcript};
use crate::par::{chunk_count, chunk_range, map_chunks};
use crate::{Error, Result, ENUMERATION_LIMIT};

/// Most protocol runs [`graph_from_protocol`] will make.
pub const GRAPH_WORK_LIMIT: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: Vec<u64>,
    right: Vec<u64>,
    words: usize,
    rows: Vec<u64>,
}

impl BipartiteGraph {
    /// Edgeless graph on the given labels.
    pub fn new(left: Vec<u64>, right: Vec<u64>) -> Self {
        let words = right.len().div_ceil(64);
        let rows = vec![0; left.len() * words];
        Self { left, right, words, rows }
    }

    /// Labels `0..left`, `0..right`.
    pub fn with_sizes(left: usize, right: usize) -> Self {
        Self::new((0..left as u64).collect(), (0..right as u64).collect())
    }

    pub fn from_fn(left: Vec<u64>, right: Vec<u64>, mut adj: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Self::new(left, right);
        for l in 0..g.left.len() {
            for r in 0..g.right.len() {
                if adj(l, r) {
                    g.add_edge(l, r);
                }
            }
        }
        g
    }

    pub fn left_labels(&self) -> &[u64] {
        &self.left
    }

    pub fn right_labels(&self) -> &[u64] {
        &self.right
    }

    pub fn left_len(&self) -> usize {
        self.left.len()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    pub fn add_edge(&mut self, l: usize, r: usize) {
        self.rows[l * self.words + r / 64] |= 1 << (r % 64);
    }

    pub fn has_edge(&self, l: usize, r: usize) -> bool {
        self.rows[l * self.words + r / 64] >> (r % 64) & 1 == 1
    }

    fn row(&self, l: usize) -> &[u64] {
        &self.rows[l * self.words..(l + 1) * self.words]
    }

    pub fn left_degree(&self, l: usize) -> u64 {
        self.row(l).iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn right_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.right.len()];
        for l in 0..self.left.len() {
            for (w, &bits) in self.row(l).iter().enumerate() {
                let mut b = bits;
                while b != 0 {
                    deg[w * 64 + b.trailing_zeros() as usize] += 1;
                    b &= b - 1;
                }
            }
        }
        deg
    }

    pub fn edge_count(&self) -> u64 {
        self.rows.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `|N(a) ∩ N(b)|`
    #[inline]
    pub fn common(&self, a: usize, b: usize) -> u64 {
        self.row(a).iter().zip(self.row(b)).map(|(x, y)| (x & y).count_ones() as u64).sum()
    }

    /// Neighbours of `l` as right indices.
    pub fn neighbours(&self, l: usize) -> Vec<usize> {
        (0..self.right.len()).filter(|&r| self.has_edge(l, r)).collect()
    }

    /// `left,right` index pairs, one edge per line after a header.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("left,right\n");
        for l in 0..self.left.len() {
            for r in self.neighbours(l) {
                writeln!(out, "{l},{r}").expect("writing to a string");
            }
        }
        out
    }

    /// Reads an edge list; vertices are labelled by index.
    pub fn from_edge_csv(text: &str, left: usize, right: usize) -> Result<Self> {
        let mut g = Self::with_sizes(left, right);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                continue;
            }
            let bad = || Error::MalformedMatrix(format!("line {}: {line:?}", n + 1));
            let (a, b) = line.split_once(',').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a >= left || b >= right {
                return Err(bad());
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }
}

/// `Σ_r C(deg(r), 2)`: the number of (unordered left pair, common neighbour) incidences.
pub fn common_pair_total(g: &BipartiteGraph) -> u128 {
    let deg = g.right_degrees();
    debug_assert_eq!(deg.iter().sum::<u64>(), g.edge_count());
    deg.iter().map(|&d| d as u128 * d.saturating_sub(1) as u128 / 2).sum()
}

/// Mean of `|N(ℓ) ∩ N(ℓ')|` over uniformly random distinct `ℓ, ℓ'`.
pub fn mean_common_neighbors(g: &BipartiteGraph) -> Result<f64> {
    let l = g.left_len() as f64;
    if g.left_len() < 2 {
        return Err(Error::InvalidParams(format!("need at least two left vertices, got {}", g.left_len())));
    }
    Ok(2.0 * common_pair_total(g) as f64 / (l * (l - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargenessReport {
    pub left: usize,
    pub right: usize,
    pub edges: u64,
    /// `2·√|L|·|R|`
    pub premise_threshold: f64,
    pub premise_met: bool,
    pub mean_common: Option<f64>,
    /// `|R| / |L|`
    pub conclusion_threshold: f64,
    pub conclusion_met: bool,
    /// Premise implies conclusion.
    pub holds: bool,
}

pub fn largeness_check(g: &BipartiteGraph) -> LargenessReport {
    let (l, r) = (g.left_len() as f64, g.right_len() as f64);
    let edges = g.edge_count();
    let premise_threshold = 2.0 * l.sqrt() * r;
    let premise_met = edges as f64 >= premise_threshold;
    let mean_common = mean_common_neighbors(g).ok();
    let conclusion_threshold = if l > 0.0 { r / l } else { f64::INFINITY };
    let conclusion_met = mean_common.is_some_and(|m| m >= conclusion_threshold);
    LargenessReport {
        left: g.left_len(),
        right: g.right_len(),
        edges,
        premise_threshold,
        premise_met,
        mean_common,
        conclusion_threshold,
        conclusion_met,
        holds: !premise_met || conclusion_met,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HdWitness {
    /// Left indices, which equal their labels on the hypercube.
    pub a: u64,
    pub b: u64,
    pub distance: u32,
    pub common: u64,
    /// `|R|·2^{−2δn−2}`
    pub threshold: f64,
}

fn hypercube_dim(g: &BipartiteGraph) -> Result<u32> {
    let len = g.left_len() as u64;
    let ok = len.is_power_of_two() && g.left_labels().iter().enumerate().all(|(i, &l)| l == i as u64);
    if !ok {
        return Err(Error::Precondition("left side is not the full hypercube {0,1}^n in order".into()));
    }
    Ok(len.trailing_zeros())
}

/// Whether `|E| ≥ 2^n·|R|·2^{−δn}`.
pub fn hd_premise_met(g: &BipartiteGraph, delta: f64) -> Result<bool> {
    let n = hypercube_dim(g)? as f64;
    Ok(g.edge_count() as f64 >= 2f64.powf(n) * g.right_len() as f64 * 2f64.powf(-delta * n))
}

/// First pair `a < b` (lexicographic) with `d_H(a, b) ≥ n/10` and
/// `|N(a) ∩ N(b)| ≥ |R|·2^{−2δn−2}`.
pub fn hd_witness(g: &BipartiteGraph, delta: f64) -> Result<Option<HdWitness>> {
    Ok(hd_witnesses(g, delta, 1)?.into_iter().next())
}

/// The first `limit` qualifying pairs of [`hd_witness`], in lexicographic order.
pub fn hd_witnesses(g: &BipartiteGraph, delta: f64, limit: usize) -> Result<Vec<HdWitness>> {
    const BLOCK: u64 = 64;
    let n = hypercube_dim(g)?;
    if !(0.0..0.1).contains(&delta) {
        return Err(Error::InvalidParams(format!("delta {delta} outside [0, 0.1)")));
    }
    let threshold = g.right_len() as f64 * 2f64.powf(-2.0 * delta * n as f64 - 2.0);
    let total = g.left_len() as u64;
    let blocks = map_chunks(chunk_count(total, BLOCK), |c| {
        let mut found = Vec::new();
        for a in chunk_range(total, BLOCK, c) {
            for b in a + 1..total {
                let distance = (a ^ b).count_ones();
                if 10 * distance < n {
                    continue;
                }
                let common = g.common(a as usize, b as usize);
                if common as f64 >= threshold {
                    found.push(HdWitness { a, b, distance, common, threshold });
                    if found.len() == limit {
                        return found;
                    }
                }
            }
        }
        found
    });
    Ok(blocks.into_iter().flatten().take(limit).collect())
}

/// Predicate on x-tuples.
pub type XFilter = dyn Fn(&[u64]) -> bool + Sync;

/// Left side: every `z`. Right side: every x-tuple passing `right_filter`
/// (labelled by its index). Edge iff the run on `(x, z)` writes `transcript`.
///
/// Only the filtered pairs are simulated, so the limit is on `|L|·|R|`.
pub fn graph_from_protocol(
    p: &Protocol,
    target: &dyn NofTarget,
    transcript: &Transcript,
    right_filter: Option<&XFilter>,
) -> Result<BipartiteGraph> {
    if p.domain != target.domain() {
        return Err(Error::Protocol(format!("{} is not defined on the domain of {}", p.name, target.describe())));
    }
    if p.is_randomized() {
        return Err(Error::Protocol(format!("{} is randomized", p.name)));
    }
    if transcript.len() != p.cost() as usize {
        return Err(Error::Protocol(format!("transcript has {} bits, protocol writes {}", transcript.len(), p.cost())));
    }
    let domain = &p.domain;
    let x_total = domain.x_total().filter(|&t| t <= ENUMERATION_LIMIT).ok_or(Error::DomainTooLarge(u128::MAX))?;
    let right: Vec<u64> = (0..x_total)
        .filter(|&i| right_filter.is_none_or(|f| f(&domain.x_tuple_at(i))))
        .collect();
    let work = right.len() as u128 * domain.z_size as u128;
    if work > GRAPH_WORK_LIMIT as u128 {
        return Err(Error::DomainTooLarge(work));
    }
    let left: Vec<u64> = (0..domain.z_size).collect();
    let rows = map_chunks(right.len() as u64, |r| -> Result<Vec<bool>> {
        let xs = domain.x_tuple_at(right[r as usize]);
        left.iter()
            .map(|&z| {
                let input = crate::nof::NofInput { xs: xs.clone(), z };
                Ok(p.simulate(&input, None)?.0.bits == transcript.bits)
            })
            .collect()
    });
    let mut g = BipartiteGraph::new(left, right);
    for (r, col) in rows.into_iter().enumerate() {
        for (l, hit) in col?.into_iter().enumerate() {
            if hit {
                g.add_edge(l, r);
            }
        }
    }
    Ok(g)
}
