//! Rapid ball growing: every node picks the first radius `t^i` at which its ball stops
//! growing by more than a `1/ε` factor, nodes are grouped by that index, a ruling set is
//! taken in each group's distance-`3t^i` graph, and the rulers' balls are colored by index.
//! Repeating on the uncolored remainder gives a full decomposition.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigUint;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{label_string, ClusterRecord, DecompositionKind, TreeRecord, WeakDecomposition};
use crate::engine::{Mode, RoundLedger};
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, bfs_restricted, Graph};
use crate::ruling::ruling_set;
use crate::weak::{membership, weak_decomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AltParams {
    pub t: u64,
    /// Growth threshold, strictly between 0 and 1.
    pub eps: Ratio<u64>,
}

impl AltParams {
    pub fn new(t: u64, eps: Ratio<u64>) -> Result<Self> {
        if t < 2 {
            return Err(Error::InvalidParameter(format!("t must be at least 2, got {t}")));
        }
        if *eps.numer() == 0 || eps >= Ratio::from_integer(1) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
        }
        Ok(Self { t, eps })
    }

    /// `t = 4b` and `ε = 2^-⌈√(L / max(1, log₂ L))⌉` with `L = ⌈log₂ n⌉` (exponent at least 1).
    pub fn defaults(g: &Graph) -> Self {
        let l = f64::from(g.log_n());
        let e = (l / l.log2().max(1.0)).sqrt().ceil().max(1.0) as u32;
        Self { t: 4 * u64::from(g.bit_length()), eps: Ratio::new(1, 1u64 << e.min(62)) }
    }
}

/// Parses `p/q` or a decimal such as `0.25` into an exact ratio.
pub fn parse_eps(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::Parse(format!("bad eps {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Ratio::new(int.checked_mul(den).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?, den))
}

/// Largest `m` with `(1/ε)^m ≤ n`.
pub fn floor_log_inv(n: usize, eps: Ratio<u64>) -> u32 {
    let (num, den) = (BigUint::from(*eps.numer()), BigUint::from(*eps.denom()));
    let n = BigUint::from(n);
    let (mut lhs, mut rhs) = (den.clone(), n.clone() * num.clone());
    let mut m = 0;
    // (den/num)^(m+1) <= n  <=>  den^(m+1) <= n·num^(m+1)
    while lhs <= rhs {
        m += 1;
        lhs *= &den;
        rhs *= &num;
    }
    m
}

/// Smallest `m` with `(1/ε)^m ≥ n`.
pub fn ceil_log_inv(n: usize, eps: Ratio<u64>) -> u32 {
    let (num, den) = (BigUint::from(*eps.numer()), BigUint::from(*eps.denom()));
    let n = BigUint::from(n);
    let (mut lhs, mut rhs) = (BigUint::from(1u32), n);
    let mut m = 0;
    while lhs < rhs {
        m += 1;
        lhs *= &den;
        rhs *= &num;
    }
    m
}

/// `⌈ε·n / (⌊log_{1/ε} n⌋ + 1)⌉`.
pub fn covered_bound(n: usize, eps: Ratio<u64>) -> usize {
    let num = u128::from(*eps.numer()) * n as u128;
    let den = u128::from(*eps.denom()) * u128::from(floor_log_inv(n, eps) + 1);
    num.div_ceil(den) as usize
}

/// One ruler's ball: members colored through it and the BFS tree of the whole ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallCluster {
    pub index: u32,
    pub center: usize,
    pub radius: u64,
    pub members: Vec<usize>,
    /// Child to parent, over every node of the ball.
    pub tree: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone)]
pub struct PartialColoring {
    pub params: AltParams,
    /// Nodes the call ran on.
    pub considered: Vec<usize>,
    pub stop_index: Vec<Option<u32>>,
    pub color_index: Vec<Option<u32>>,
    pub clusters: Vec<BallCluster>,
    pub ledger: RoundLedger,
}

impl PartialColoring {
    pub fn colored_count(&self) -> usize {
        self.color_index.iter().filter(|c| c.is_some()).count()
    }

    pub fn max_stop_index(&self) -> u32 {
        self.stop_index.iter().flatten().copied().max().unwrap_or(0)
    }

    pub fn covered_bound(&self) -> usize {
        covered_bound(self.considered.len(), self.params.eps)
    }

    pub fn index_bound(&self) -> u32 {
        ceil_log_inv(self.considered.len(), self.params.eps)
    }
}

fn radius_at(t: u64, i: u32, cap: u64) -> u64 {
    t.checked_pow(i).map_or(cap, |r| r.min(cap))
}

/// Runs on all of `G`.
pub fn rapid_ball_growing(g: &Graph, params: AltParams) -> Result<PartialColoring> {
    let all: Vec<usize> = (0..g.node_count()).collect();
    rapid_ball_growing_within(g, &all, params, Mode::Local)
}

/// Runs on the induced subgraph `G[set]`; balls and distances are measured inside it.
pub fn rapid_ball_growing_within(g: &Graph, set: &[usize], params: AltParams, mode: Mode) -> Result<PartialColoring> {
    let params = AltParams::new(params.t, params.eps)?;
    let mask = membership(g, set)?;
    let n = g.node_count();
    let cap = set.len() as u64;
    let (num, den) = (u128::from(*params.eps.numer()), u128::from(*params.eps.denom()));

    // Stopping index per node from its ball-size profile.
    let stops: Vec<(usize, u32)> = set
        .par_iter()
        .map(|&u| {
            let d = bfs_restricted(g, &[u], Some(&mask), None);
            let mut layer_counts: Vec<u128> = Vec::new();
            for v in set {
                if let Some(x) = d.get(*v) {
                    let x = x as usize;
                    if layer_counts.len() <= x {
                        layer_counts.resize(x + 1, 0);
                    }
                    layer_counts[x] += 1;
                }
            }
            let mut prefix = layer_counts;
            for i in 1..prefix.len() {
                prefix[i] += prefix[i - 1];
            }
            let size = |r: u64| prefix[(r as usize).min(prefix.len() - 1)];
            let mut i = 0;
            loop {
                let inner = size(radius_at(params.t, i, cap));
                let outer = size(radius_at(params.t, i + 1, cap));
                if den * inner >= num * outer {
                    break (u, i);
                }
                i += 1;
            }
        })
        .collect();
    let mut stop_index = vec![None; n];
    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (u, i) in stops {
        stop_index[u] = Some(i);
        classes.entry(i).or_default().push(u);
    }
    let max_index = classes.keys().copied().max().unwrap_or(0);

    let mut ledger = RoundLedger::new(mode);
    ledger.charge_rounds(radius_at(params.t, max_index + 1, cap));

    let mut color_index = vec![None; n];
    let mut clusters = Vec::new();
    for (&i, class) in &classes {
        let r = radius_at(params.t, i, cap);
        let reach = radius_at(params.t, i, cap).saturating_mul(3).min(cap);
        let in_class: Vec<bool> = {
            let mut m = vec![false; n];
            for &u in class {
                m[u] = true;
            }
            m
        };
        let edges: Vec<(usize, usize)> = class
            .par_iter()
            .flat_map_iter(|&u| {
                let d = bfs_restricted(g, &[u], Some(&mask), Some(reach as u32));
                let in_class = &in_class;
                (0..n).filter(move |&v| v > u && in_class[v] && d.get(v).is_some()).map(move |v| (u, v))
            })
            .collect();
        let gi = Graph::from_edge_list(n, &edges, Some(g.ids().to_vec()))?;
        let rulers = ruling_set(&gi, class)?;
        ledger.absorb_scaled(&rulers.ledger, reach.max(1));
        ledger.charge_rounds(r);

        for &u in &rulers.members {
            let (order, parent) = bfs_tree(g, u, &mask, r);
            let mut members: Vec<usize> = order.iter().copied().filter(|&v| color_index[v].is_none()).collect();
            for &v in &members {
                color_index[v] = Some(i);
            }
            members.sort_unstable();
            if !members.is_empty() {
                clusters.push(BallCluster { index: i, center: u, radius: r, members, tree: parent });
            }
        }
    }

    Ok(PartialColoring { params, considered: set.to_vec(), stop_index, color_index, clusters, ledger })
}

/// BFS tree of `B(root, radius)` inside `mask`; returns nodes in visit order and parents.
fn bfs_tree(g: &Graph, root: usize, mask: &[bool], radius: u64) -> (Vec<usize>, BTreeMap<usize, usize>) {
    let mut depth = BTreeMap::new();
    let mut parent = BTreeMap::new();
    let mut order = vec![root];
    depth.insert(root, 0u64);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let dv = depth[&v];
        if dv == radius {
            continue;
        }
        for &w in g.neighbors(v) {
            if mask[w] && !depth.contains_key(&w) {
                depth.insert(w, dv + 1);
                parent.insert(w, v);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    (order, parent)
}

/// Statistics of one partial-coloring call within a full decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltCallStats {
    pub considered: usize,
    pub colored: usize,
    pub covered_bound: usize,
    pub max_stop_index: u32,
    pub index_bound: u32,
    pub max_radius: u64,
}

#[derive(Debug, Clone)]
pub struct AltDecomposition {
    pub decomposition: WeakDecomposition,
    pub calls: Vec<AltCallStats>,
    pub params: AltParams,
}

impl AltDecomposition {
    pub fn max_radius(&self) -> u64 {
        self.calls.iter().map(|c| c.max_radius).max().unwrap_or(0)
    }
}

/// Applies rapid ball growing to the uncolored remainder until every node is colored. Each
/// call's distinct stopping indices become consecutive new colors.
pub fn full_alt_decomposition(g: &Graph, params: AltParams) -> Result<AltDecomposition> {
    full_alt_decomposition_with_mode(g, params, Mode::Local)
}

pub fn full_alt_decomposition_with_mode(g: &Graph, params: AltParams, mode: Mode) -> Result<AltDecomposition> {
    let params = AltParams::new(params.t, params.eps)?;
    let n = g.node_count();
    let bits = g.bit_length();
    let mut dec = WeakDecomposition {
        kind: DecompositionKind::Alt,
        k: 1,
        colors: 0,
        color_of: vec![0; n],
        clusters: Vec::new(),
        ledger: RoundLedger::new(mode),
        color_stats: Vec::new(),
    };
    let mut calls = Vec::new();
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        let pc = rapid_ball_growing_within(g, &remaining, params, mode)?;
        if pc.colored_count() == 0 {
            return Err(Error::Invariant("rapid ball growing colored no nodes".into()));
        }
        let used: BTreeSet<u32> = pc.clusters.iter().map(|c| c.index).collect();
        let color_for: BTreeMap<u32, usize> = used.iter().enumerate().map(|(j, &i)| (i, dec.colors + 1 + j)).collect();
        for c in &pc.clusters {
            let color = color_for[&c.index];
            for &v in &c.members {
                dec.color_of[v] = color;
            }
            dec.clusters.push(ClusterRecord {
                color,
                label: label_string(g.id(c.center), bits),
                members: c.members.clone(),
                tree: TreeRecord { root: c.center, parent: c.tree.clone(), terminals: c.members.clone() },
            });
        }
        dec.colors += used.len();
        dec.ledger.absorb(&pc.ledger);
        calls.push(AltCallStats {
            considered: pc.considered.len(),
            colored: pc.colored_count(),
            covered_bound: pc.covered_bound(),
            max_stop_index: pc.max_stop_index(),
            index_bound: pc.index_bound(),
            max_radius: pc.clusters.iter().map(|c| c.radius).max().unwrap_or(0),
        });
        remaining.retain(|&v| pc.color_index[v].is_none());
    }
    Ok(AltDecomposition { decomposition: dec, calls, params })
}

/// Side-by-side metrics of the bit-phase decomposition and the ball-growing one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub n: usize,
    pub weak: DecompositionMetrics,
    pub alt: DecompositionMetrics,
    pub alt_t: u64,
    pub alt_eps: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionMetrics {
    pub colors: usize,
    /// Largest `G`-distance between two members of one cluster.
    pub max_weak_diameter: u32,
    pub rounds: u64,
}

/// Exact weak diameter of every cluster, maximized.
pub fn max_weak_diameter(g: &Graph, dec: &WeakDecomposition) -> u32 {
    dec.clusters
        .par_iter()
        .map(|c| {
            c.members
                .iter()
                .map(|&m| {
                    let d = bfs_distances(g, &[m]);
                    c.members.iter().map(|&w| d.get(w).unwrap_or(u32::MAX)).max().unwrap_or(0)
                })
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

pub fn compare_decompositions(g: &Graph) -> Result<CompareReport> {
    let weak = weak_decomposition(g)?;
    let params = AltParams::defaults(g);
    let alt = full_alt_decomposition(g, params)?;
    let metrics = |d: &WeakDecomposition| DecompositionMetrics {
        colors: d.colors,
        max_weak_diameter: max_weak_diameter(g, d),
        rounds: d.ledger.rounds(),
    };
    Ok(CompareReport {
        n: g.node_count(),
        weak: metrics(&weak),
        alt: metrics(&alt.decomposition),
        alt_t: params.t,
        alt_eps: params.eps.to_string(),
    })
}
