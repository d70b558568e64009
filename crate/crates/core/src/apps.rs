//! Symmetry breaking on top of a decomposition: colors are processed one after another and
//! the clusters of one color work independently, each fixing its members in ascending
//! identifier order.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::WeakDecomposition;
use crate::engine::{Mode, RoundLedger};
use crate::error::{Error, Result};
use crate::graph::{ball, Graph};
use crate::power::power_decomposition_with_mode;
use crate::weak::weak_decomposition_with_mode;

/// Clusters of `color` with members sorted by identifier, in the decomposition's order.
fn color_clusters(g: &Graph, dec: &WeakDecomposition, color: usize) -> Vec<(u32, Vec<usize>)> {
    dec.clusters_of_color(color)
        .map(|c| {
            let mut m = c.members.clone();
            m.sort_by_key(|&v| g.id(v));
            (c.tree.radius(), m)
        })
        .collect()
}

fn color_multiplicity(dec: &WeakDecomposition, color: usize) -> u64 {
    dec.color_stats.get(color - 1).map_or(1, |s| u64::from(s.max_multiplicity.max(1)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisResult {
    pub members: Vec<usize>,
    pub ledger: RoundLedger,
}

pub fn mis(g: &Graph) -> Result<MisResult> {
    mis_with_mode(g, Mode::Local)
}

/// Maximal independent set: each cluster greedily adds members with no neighbor in the set.
pub fn mis_with_mode(g: &Graph, mode: Mode) -> Result<MisResult> {
    let dec = weak_decomposition_with_mode(g, mode)?;
    let mut ledger = dec.ledger.clone();
    let mut in_set = vec![false; g.node_count()];
    for color in 1..=dec.colors {
        let clusters = color_clusters(g, &dec, color);
        let radius = clusters.iter().map(|c| c.0).max().unwrap_or(0);
        for (_, members) in clusters {
            for v in members {
                if !g.neighbors(v).iter().any(|&w| in_set[w]) {
                    in_set[v] = true;
                }
            }
        }
        // Gather member neighborhoods at the root, decide, scatter back.
        ledger.charge_cluster_op(u64::from(radius) + 1, color_multiplicity(&dec, color));
    }
    let members = (0..g.node_count()).filter(|&v| in_set[v]).collect();
    Ok(MisResult { members, ledger })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringResult {
    pub colors: Vec<u64>,
    pub ledger: RoundLedger,
}

pub fn list_coloring(g: &Graph, lists: &[Vec<u64>]) -> Result<ColoringResult> {
    list_coloring_with_mode(g, lists, Mode::Local)
}

/// Proper coloring with `color(v) ∈ lists[v]`; needs `|lists[v]| ≥ deg(v) + 1` distinct values.
pub fn list_coloring_with_mode(g: &Graph, lists: &[Vec<u64>], mode: Mode) -> Result<ColoringResult> {
    let n = g.node_count();
    if lists.len() != n {
        return Err(Error::InvalidParameter(format!("{} lists for {n} nodes", lists.len())));
    }
    let mut sorted: Vec<Vec<u64>> = Vec::with_capacity(n);
    for (v, l) in lists.iter().enumerate() {
        let mut l = l.clone();
        l.sort_unstable();
        l.dedup();
        if l.len() < g.degree(v) + 1 {
            return Err(Error::ListTooSmall { node: v, size: l.len(), needed: g.degree(v) + 1 });
        }
        sorted.push(l);
    }
    let dec = weak_decomposition_with_mode(g, mode)?;
    let mut ledger = dec.ledger.clone();
    let mut color: Vec<Option<u64>> = vec![None; n];
    for c in 1..=dec.colors {
        let clusters = color_clusters(g, &dec, c);
        let radius = clusters.iter().map(|c| c.0).max().unwrap_or(0);
        for (_, members) in clusters {
            for v in members {
                let pick = sorted[v]
                    .iter()
                    .copied()
                    .find(|x| !g.neighbors(v).iter().any(|&w| color[w] == Some(*x)))
                    .ok_or_else(|| Error::Invariant(format!("node {v} has no free list color")))?;
                color[v] = Some(pick);
            }
        }
        ledger.charge_cluster_op(u64::from(radius) + 1, color_multiplicity(&dec, c));
    }
    let colors = color.into_iter().map(|c| c.expect("every node is in some cluster")).collect();
    Ok(ColoringResult { colors, ledger })
}

/// `(Δ+1)`-coloring: every list is `{0, ..., Δ}`.
pub fn delta_plus_one_coloring(g: &Graph) -> Result<ColoringResult> {
    let palette: Vec<u64> = (0..=g.max_degree() as u64).collect();
    list_coloring(g, &vec![palette; g.node_count()])
}

/// Random bits per node, some of them fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    bits_per_node: u32,
    values: Vec<Option<bool>>,
}

impl PartialAssignment {
    pub fn unfixed(n: usize, bits_per_node: u32) -> Self {
        Self { bits_per_node, values: vec![None; n * bits_per_node as usize] }
    }

    pub fn from_values(bits_per_node: u32, values: &[u64]) -> Self {
        let mut p = Self::unfixed(values.len(), bits_per_node);
        for (v, &x) in values.iter().enumerate() {
            for j in 0..bits_per_node {
                p.set(v, j, (x >> j) & 1 == 1);
            }
        }
        p
    }

    pub fn get(&self, v: usize, bit: u32) -> Option<bool> {
        self.values[v * self.bits_per_node as usize + bit as usize]
    }

    pub fn set(&mut self, v: usize, bit: u32, value: bool) {
        self.values[v * self.bits_per_node as usize + bit as usize] = Some(value);
    }

    /// The node's bits as an integer, if all are fixed.
    pub fn node_value(&self, v: usize) -> Option<u64> {
        (0..self.bits_per_node).try_fold(0u64, |acc, j| self.get(v, j).map(|b| acc | (u64::from(b) << j)))
    }
}

/// A locally checkable problem with per-node cost flags `f_v` over random bits.
pub trait LocalProblem: Sync {
    fn bits_per_node(&self) -> u32;
    /// `f_v` depends only on bits within this many hops of `v`.
    fn radius(&self) -> u32;
    /// `f_v` on a full assignment (one integer of `bits_per_node` bits per node).
    fn flag_cost(&self, v: usize, assignment: &[u64]) -> Ratio<i64>;
    /// `E[f_v | fixed bits]` with unfixed bits independent and uniform.
    fn conditional_expectation(&self, v: usize, partial: &PartialAssignment) -> Ratio<i64>;
}

/// Demo problem: `f_v` counts monochromatic edges `vu` with `id(v) < id(u)`.
pub struct CutSplit<'a> {
    g: &'a Graph,
}

pub fn cut_split_problem(g: &Graph) -> CutSplit<'_> {
    CutSplit { g }
}

impl CutSplit<'_> {
    fn owned(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let id = self.g.id(v);
        self.g.neighbors(v).iter().copied().filter(move |&u| self.g.id(u) > id)
    }
}

impl LocalProblem for CutSplit<'_> {
    fn bits_per_node(&self) -> u32 {
        1
    }

    fn radius(&self) -> u32 {
        1
    }

    fn flag_cost(&self, v: usize, assignment: &[u64]) -> Ratio<i64> {
        Ratio::from_integer(self.owned(v).filter(|&u| assignment[u] & 1 == assignment[v] & 1).count() as i64)
    }

    fn conditional_expectation(&self, v: usize, partial: &PartialAssignment) -> Ratio<i64> {
        let half = Ratio::new(1, 2);
        self.owned(v)
            .map(|u| match (partial.get(v, 0), partial.get(u, 0)) {
                (Some(a), Some(b)) => Ratio::from_integer(i64::from(a == b)),
                _ => half,
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerandOptions {
    /// Seed for consistency spot checks and optional cluster shuffling.
    pub seed: u64,
    /// Random full assignments on which every node's expectation is compared to its flag.
    pub spot_checks: usize,
    /// Process same-color clusters in a seeded random order instead of label order.
    pub shuffle_clusters: bool,
    pub mode: Mode,
}

impl Default for DerandOptions {
    fn default() -> Self {
        Self { seed: 0, spot_checks: 4, shuffle_clusters: false, mode: Mode::Local }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerandResult {
    pub bits: Vec<u64>,
    pub final_cost: Ratio<i64>,
    pub initial_expectation: Ratio<i64>,
    pub ledger: RoundLedger,
    pub colors: usize,
}

#[derive(Serialize)]
struct DerandJson<'a> {
    bits: &'a [u64],
    final_cost: String,
    initial_expectation: String,
    ledger: &'a RoundLedger,
}

impl DerandResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&DerandJson {
            bits: &self.bits,
            final_cost: self.final_cost.to_string(),
            initial_expectation: self.initial_expectation.to_string(),
            ledger: &self.ledger,
        })
        .expect("serialization cannot fail")
    }
}

pub fn derandomize(g: &Graph, problem: &dyn LocalProblem) -> Result<DerandResult> {
    derandomize_with(g, problem, DerandOptions::default())
}

/// Fixes every node's bits by the method of conditional expectations, cluster by cluster
/// over a decomposition of `G^{2R+1}`.
pub fn derandomize_with(g: &Graph, problem: &dyn LocalProblem, opts: DerandOptions) -> Result<DerandResult> {
    let n = g.node_count();
    let bpn = problem.bits_per_node();
    if bpn == 0 || bpn > 64 {
        return Err(Error::InvalidParameter(format!("bits_per_node must be in 1..=64, got {bpn}")));
    }
    let r = problem.radius();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    spot_check(problem, n, bpn, opts.spot_checks, &mut rng)?;

    let dec = power_decomposition_with_mode(g, 2 * r + 1, opts.mode)?;
    let mut ledger = dec.ledger.clone();
    // Flags that can change when v's bits are fixed.
    let affected: Vec<Vec<usize>> = (0..n).map(|v| ball(g, v, r, None)).collect();

    let mut partial = PartialAssignment::unfixed(n, bpn);
    let initial: Ratio<i64> = (0..n).map(|v| problem.conditional_expectation(v, &partial)).sum();
    for color in 1..=dec.colors {
        let mut clusters = color_clusters(g, &dec, color);
        if opts.shuffle_clusters {
            clusters.shuffle(&mut rng);
        }
        let radius = clusters.iter().map(|c| c.0).max().unwrap_or(0);
        for (_, members) in clusters {
            for v in members {
                for j in 0..bpn {
                    let local = |p: &PartialAssignment| -> Ratio<i64> {
                        affected[v].iter().map(|&u| problem.conditional_expectation(u, p)).sum()
                    };
                    let before = local(&partial);
                    partial.set(v, j, false);
                    let e0 = local(&partial);
                    partial.set(v, j, true);
                    let e1 = local(&partial);
                    let (value, after) = if e1 < e0 { (true, e1) } else { (false, e0) };
                    if after > before {
                        return Err(Error::InconsistentProblem { node: v });
                    }
                    partial.set(v, j, value);
                }
            }
        }
        ledger.charge_cluster_op(u64::from(radius) + u64::from(r), color_multiplicity(&dec, color));
    }

    let bits: Vec<u64> = (0..n).map(|v| partial.node_value(v).expect("every bit is fixed")).collect();
    let mut final_cost = Ratio::from_integer(0);
    for v in 0..n {
        let f = problem.flag_cost(v, &bits);
        if f != problem.conditional_expectation(v, &partial) {
            return Err(Error::InconsistentProblem { node: v });
        }
        final_cost += f;
    }
    Ok(DerandResult { bits, final_cost, initial_expectation: initial, ledger, colors: dec.colors })
}

fn spot_check(problem: &dyn LocalProblem, n: usize, bpn: u32, rounds: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mask = if bpn == 64 { u64::MAX } else { (1u64 << bpn) - 1 };
    for _ in 0..rounds {
        let values: Vec<u64> = (0..n).map(|_| rng.gen::<u64>() & mask).collect();
        let partial = PartialAssignment::from_values(bpn, &values);
        for v in 0..n {
            if problem.flag_cost(v, &values) != problem.conditional_expectation(v, &partial) {
                return Err(Error::InconsistentProblem { node: v });
            }
        }
    }
    Ok(())
}
