//! Strong-diameter decomposition by ball carving inside the clusters of a helper
//! decomposition of `G^K`, `K = 10·⌈log₂ n⌉`.
//!
//! Each output color walks the helper colors in order. Inside every helper cluster, balls
//! are grown from the smallest-identifier node still available until the ball's outer
//! boundary is smaller than the ball. The ball becomes a cluster and its boundary is dead
//! until the next output color.

use serde::{Deserialize, Serialize};

use crate::engine::{Mode, RoundLedger};
use crate::error::{Error, Result};
use crate::graph::{power, Graph};
use crate::weak::weak_decomposition_with_mode;

/// A carved ball, its outer boundary, and the radius at which growth stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Carve {
    pub ball: Vec<usize>,
    pub boundary: Vec<usize>,
    pub radius: u32,
}

/// Grows `B(start, r)` inside the nodes marked in `allowed` for `r = 0, 1, ...` until the
/// set of allowed neighbors outside the ball is smaller than the ball.
pub fn ball_carve(g: &Graph, allowed: &[bool], start: usize) -> Result<Carve> {
    if start >= g.node_count() {
        return Err(Error::NodeOutOfRange(start));
    }
    if !allowed[start] {
        return Err(Error::InvalidParameter(format!("start node {start} is not in the subgraph")));
    }
    let mut seen = vec![false; g.node_count()];
    seen[start] = true;
    let mut ball = vec![start];
    let mut layer = vec![start];
    let mut radius = 0;
    loop {
        let mut next = Vec::new();
        for &v in &layer {
            for &w in g.neighbors(v) {
                if allowed[w] && !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.len() < ball.len() {
            ball.sort_unstable();
            next.sort_unstable();
            return Ok(Carve { ball, boundary: next, radius });
        }
        ball.extend_from_slice(&next);
        layer = next;
        radius += 1;
    }
}

/// Per-output-color statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrongColorStats {
    pub clustered: usize,
    pub died: usize,
    pub balls: usize,
    pub max_ball_radius: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongDecomposition {
    pub colors: usize,
    pub color_of: Vec<usize>,
    pub ledger: RoundLedger,
    #[serde(skip)]
    pub color_stats: Vec<StrongColorStats>,
    /// Hop distance `K` used for the helper power graph.
    #[serde(skip)]
    pub helper_k: u32,
    #[serde(skip)]
    pub helper_colors: usize,
    /// Smallest `G`-distance between two same-color helper clusters (`None` if no color has two).
    #[serde(skip)]
    pub helper_min_separation: Option<u32>,
}

impl StrongDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `K = 10·⌈log₂ n⌉`, at least 1.
pub fn helper_distance(g: &Graph) -> u32 {
    (10 * g.log_n()).max(1)
}

pub fn strong_decomposition(g: &Graph) -> Result<StrongDecomposition> {
    strong_decomposition_with_mode(g, Mode::Local)
}

pub fn strong_decomposition_with_mode(g: &Graph, mode: Mode) -> Result<StrongDecomposition> {
    let n = g.node_count();
    let k = helper_distance(g);
    let gk = power(g, k)?;
    let helper = weak_decomposition_with_mode(&gk, mode)?;
    let mut ledger = RoundLedger::new(mode);
    // Every round on G^K is K rounds on G.
    ledger.absorb_scaled(&helper.ledger, u64::from(k));

    let mut helper_members: Vec<Vec<Vec<usize>>> = vec![Vec::new(); helper.colors];
    let mut helper_radius = vec![0u64; helper.colors];
    for c in &helper.clusters {
        let mut members = c.members.clone();
        members.sort_by_key(|&v| g.id(v));
        helper_members[c.color - 1].push(members);
        let depth = c.tree.radius();
        helper_radius[c.color - 1] = helper_radius[c.color - 1].max(u64::from(depth) * u64::from(k));
    }

    let mut color_of = vec![0usize; n];
    let mut uncolored = n;
    let mut colors = 0;
    let mut color_stats = Vec::new();
    let log_n = u64::from(g.log_n());
    while uncolored > 0 {
        colors += 1;
        let mut stats = StrongColorStats::default();
        // Uncolored and not on the boundary of a ball carved in this color.
        let mut allowed: Vec<bool> = color_of.iter().map(|&c| c == 0).collect();
        for (hc, clusters) in helper_members.iter().enumerate() {
            for members in clusters {
                loop {
                    let start = members.iter().copied().find(|&v| allowed[v]);
                    let Some(start) = start else { break };
                    let carve = ball_carve(g, &allowed, start)?;
                    for &v in &carve.ball {
                        color_of[v] = colors;
                        allowed[v] = false;
                    }
                    for &v in &carve.boundary {
                        allowed[v] = false;
                    }
                    uncolored -= carve.ball.len();
                    stats.clustered += carve.ball.len();
                    stats.died += carve.boundary.len();
                    stats.balls += 1;
                    stats.max_ball_radius = stats.max_ball_radius.max(carve.radius);
                }
            }
            // One stage: gather the (log n)-neighborhood of every helper cluster of this color
            // at its root and broadcast the carving back.
            ledger.charge_rounds(2 * (helper_radius[hc] + log_n) + 1);
        }
        if stats.clustered == 0 {
            return Err(Error::Invariant(format!("output color {colors} clustered no nodes")));
        }
        color_stats.push(stats);
    }

    Ok(StrongDecomposition {
        colors,
        color_of,
        ledger,
        color_stats,
        helper_k: k,
        helper_colors: helper.colors,
        helper_min_separation: helper_separation(g, &helper_members),
    })
}

fn helper_separation(g: &Graph, helper: &[Vec<Vec<usize>>]) -> Option<u32> {
    let mut best: Option<u32> = None;
    for clusters in helper {
        if clusters.len() < 2 {
            continue;
        }
        for (i, a) in clusters.iter().enumerate() {
            let d = crate::graph::bfs_distances(g, a);
            for b in &clusters[i + 1..] {
                for &v in b {
                    let dv = d.get(v).unwrap_or(u32::MAX);
                    best = Some(best.map_or(dv, |x| x.min(dv)));
                }
            }
        }
    }
    best
}
