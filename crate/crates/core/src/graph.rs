//! Immutable undirected graphs with per-node identifiers, BFS distances,
//! explicit graph powers, and the instance generators used across the crate.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `⌈log₂ n⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `⌊log₂ n⌋` for `n ≥ 1`; zero for `n = 0`.
pub fn floor_log2(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        usize::BITS - 1 - n.leading_zeros()
    }
}

/// Number of bits needed to write `x`, at least 1.
pub fn bit_length(x: u64) -> u32 {
    (u64::BITS - x.leading_zeros()).max(1)
}

/// Undirected simple graph. Nodes are indices `0..n`; each carries a unique identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    ids: Vec<u64>,
    bits: u32,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges are merged; self-loops are rejected.
    /// Without `ids`, node `v` gets identifier `v`.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)], ids: Option<Vec<u64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::EndpointOutOfRange { u, v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let ids = match ids {
            Some(ids) => ids,
            None => (0..n as u64).collect(),
        };
        Self::from_adjacency(adj, ids)
    }

    fn from_adjacency(adj: Vec<Vec<usize>>, ids: Vec<u64>) -> Result<Self> {
        let n = adj.len();
        if ids.len() != n {
            return Err(Error::IdLengthMismatch { got: ids.len(), expected: n });
        }
        let mut seen = HashSet::with_capacity(n);
        for &id in &ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id));
            }
        }
        let bits = bit_length(ids.iter().copied().max().unwrap_or(0));
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Ok(Self { adj, ids, bits, edge_count })
    }

    /// Same topology with a new identifier assignment.
    pub fn with_ids(&self, ids: Vec<u64>) -> Result<Self> {
        Self::from_adjacency(self.adj.clone(), ids)
    }

    /// Same topology with identifiers `0..n` permuted by a seeded shuffle.
    pub fn with_shuffled_ids(&self, seed: u64) -> Self {
        let mut ids: Vec<u64> = (0..self.node_count() as u64).collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::from_adjacency(self.adj.clone(), ids).expect("a permutation of 0..n is a valid id set")
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    /// Identifier bit length `b`: bits of the largest identifier, at least 1.
    pub fn bit_length(&self) -> u32 {
        self.bits
    }

    /// `⌈log₂ n⌉` for this graph's node count.
    pub fn log_n(&self) -> u32 {
        ceil_log2(self.node_count())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| u < v).map(move |v| (u, v)))
    }

    /// Node indices sorted by ascending identifier.
    pub fn nodes_by_id(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.node_count()).collect();
        order.sort_by_key(|&v| self.ids[v]);
        order
    }
}

/// Hop distances from a source set; `None` marks unreachable nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    dist: Vec<u32>,
}

impl DistanceMap {
    const UNREACHABLE: u32 = u32::MAX;

    pub fn get(&self, v: usize) -> Option<u32> {
        match self.dist[v] {
            Self::UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn to_vec(&self) -> Vec<Option<u32>> {
        (0..self.dist.len()).map(|v| self.get(v)).collect()
    }

    /// Largest finite distance, if any node is reachable.
    pub fn eccentricity(&self) -> Option<u32> {
        self.dist.iter().copied().filter(|&d| d != Self::UNREACHABLE).max()
    }
}

/// Exact multi-source BFS distances.
pub fn bfs_distances(g: &Graph, sources: &[usize]) -> DistanceMap {
    bfs_restricted(g, sources, None, None)
}

/// BFS that only enters nodes with `allowed[v]` set (sources must be allowed) and stops
/// expanding at depth `limit`.
pub fn bfs_restricted(g: &Graph, sources: &[usize], allowed: Option<&[bool]>, limit: Option<u32>) -> DistanceMap {
    let n = g.node_count();
    let mut dist = vec![DistanceMap::UNREACHABLE; n];
    let mut queue = VecDeque::new();
    for &s in sources {
        if allowed.is_none_or(|a| a[s]) && dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        if limit.is_some_and(|l| du >= l) {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == DistanceMap::UNREACHABLE && allowed.is_none_or(|a| a[w]) {
                dist[w] = du + 1;
                queue.push_back(w);
            }
        }
    }
    DistanceMap { dist }
}

/// Nodes within `radius` hops of `source` (restricted to `allowed` when given), in BFS order.
pub fn ball(g: &Graph, source: usize, radius: u32, allowed: Option<&[bool]>) -> Vec<usize> {
    let mut seen = HashSet::new();
    let mut out = vec![source];
    seen.insert(source);
    let mut frontier = vec![source];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in g.neighbors(u) {
                if allowed.is_none_or(|a| a[w]) && seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend_from_slice(&next);
        frontier = next;
    }
    out
}

/// `G^k`: `uv` is an edge iff `1 ≤ dist_G(u, v) ≤ k`. Identifiers are preserved.
pub fn power(g: &Graph, k: u32) -> Result<Graph> {
    if k == 0 {
        return Err(Error::InvalidParameter("power exponent must be at least 1".into()));
    }
    if k == 1 {
        return Ok(g.clone());
    }
    let n = g.node_count();
    let mut adj = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];
    for s in 0..n {
        mark[s] = s;
        let mut list = Vec::new();
        let mut frontier = vec![s];
        for _ in 0..k {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in g.neighbors(u) {
                    if mark[w] != s {
                        mark[w] = s;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            list.extend_from_slice(&next);
            frontier = next;
        }
        list.sort_unstable();
        adj.push(list);
    }
    Graph::from_adjacency(adj, g.ids.clone())
}

pub fn gen_path(n: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::from_edge_list(n, &edges, None)
}

pub fn gen_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs at least 3 nodes, got {n}")));
    }
    let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    edges.push((n - 1, 0));
    Graph::from_edge_list(n, &edges, None)
}

pub fn gen_complete(n: usize) -> Result<Graph> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::from_edge_list(n, &edges, None)
}

/// Star `K_{1,leaves}` with center 0.
pub fn gen_star(leaves: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    Graph::from_edge_list(leaves + 1, &edges, None)
}

/// `dim`-dimensional torus with the given side: nodes are coordinate vectors in
/// `[0, side)^dim`, adjacent iff every coordinate differs by at most one modulo `side`.
pub fn gen_torus(dim: u32, side: usize) -> Result<Graph> {
    if dim == 0 {
        return Err(Error::InvalidParameter("torus dimension must be at least 1".into()));
    }
    if side < 3 {
        return Err(Error::InvalidParameter(format!("torus side must be at least 3, got {side}")));
    }
    let n = side
        .checked_pow(dim)
        .ok_or_else(|| Error::InvalidParameter("torus is too large".into()))?;
    let dim = dim as usize;
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let d = (code % 3) as i64 - 1;
                    code /= 3;
                    d
                })
                .collect()
        })
        .filter(|off: &Vec<i64>| off.iter().any(|&d| d != 0))
        .collect();
    let mut adj = Vec::with_capacity(n);
    let mut coords = vec![0i64; dim];
    for v in 0..n {
        let mut rest = v;
        for c in coords.iter_mut() {
            *c = (rest % side) as i64;
            rest /= side;
        }
        let mut list: Vec<usize> = offsets
            .iter()
            .map(|off| {
                let mut idx = 0usize;
                for j in (0..dim).rev() {
                    let c = (coords[j] + off[j]).rem_euclid(side as i64) as usize;
                    idx = idx * side + c;
                }
                idx
            })
            .collect();
        list.sort_unstable();
        list.dedup();
        adj.push(list);
    }
    Graph::from_adjacency(adj, (0..n as u64).collect())
}

/// Erdős–Rényi `G(n, p)`: each unordered pair `u < v`, visited in lexicographic order,
/// is kept when the next draw of a ChaCha8 stream seeded with `seed` falls below `p`.
pub fn gen_random(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("edge probability must lie in [0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edge_list(n, &edges, None)
}

/// On-disk JSON form: `{"n": int, "edges": [[u, v], ...], "ids": [int, ...]}` (ids optional).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<u64>>,
}

impl From<&Graph> for GraphFile {
    fn from(g: &Graph) -> Self {
        let default_ids = g.ids.iter().enumerate().all(|(v, &id)| id == v as u64);
        GraphFile {
            n: g.node_count(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            ids: (!default_ids).then(|| g.ids.clone()),
        }
    }
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edge_list(file.n, &edges, file.ids)
    }
}

impl Graph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile::from(self)).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Graph::try_from(file)
    }

    /// Parses the text edge-list format: one `u v` pair per line, `#` starts a comment.
    /// The node count is one more than the largest endpoint.
    pub fn from_edge_list_text(text: &str) -> Result<Graph> {
        let mut edges = Vec::new();
        let mut n = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {}: expected two endpoints", lineno + 1)))?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let (u, v) = (next()?, next()?);
            if parts.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
            }
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v));
        }
        Graph::from_edge_list(n, &edges, None)
    }
}

/// Connected components of `G[members]`, each sorted, ordered by smallest member.
pub fn components_within(g: &Graph, members: &[usize]) -> Vec<Vec<usize>> {
    let mut allowed = vec![false; g.node_count()];
    for &v in members {
        allowed[v] = true;
    }
    let mut seen = vec![false; g.node_count()];
    let sorted: BTreeSet<usize> = members.iter().copied().collect();
    let mut out = Vec::new();
    for &s in &sorted {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            i += 1;
            for &w in g.neighbors(u) {
                if allowed[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<u32>>> {
        let n = g.node_count();
        let mut d = vec![vec![None; n]; n];
        for v in 0..n {
            d[v][v] = Some(0);
            for &w in g.neighbors(v) {
                d[v][w] = Some(1);
            }
        }
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (d[i][m], d[m][j]) {
                        if d[i][j].is_none_or(|c| a + b < c) {
                            d[i][j] = Some(a + b);
                        }
                    }
                }
            }
        }
        d
    }

    #[test]
    fn from_edge_list_examples() {
        let single = Graph::from_edge_list(1, &[], None).unwrap();
        assert_eq!(single.node_count(), 1);
        assert_eq!(single.bit_length(), 1);

        let p4 = Graph::from_edge_list(4, &[(0, 1), (1, 2), (2, 3)], None).unwrap();
        let degrees: Vec<usize> = (0..4).map(|v| p4.degree(v)).collect();
        assert_eq!(degrees, vec![1, 2, 2, 1]);

        assert_eq!(Graph::from_edge_list(4, &[(0, 0)], None), Err(Error::SelfLoop(0)));
        assert!(matches!(
            Graph::from_edge_list(3, &[(0, 3)], None),
            Err(Error::EndpointOutOfRange { .. })
        ));
        assert_eq!(
            Graph::from_edge_list(2, &[(0, 1)], Some(vec![5, 5])),
            Err(Error::DuplicateId(5))
        );
        assert_eq!(Graph::from_edge_list(0, &[], None), Err(Error::EmptyGraph));
    }

    #[test]
    fn duplicate_edges_are_merged() {
        let g = Graph::from_edge_list(3, &[(0, 1), (1, 0), (0, 1), (1, 2)], None).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn bit_length_follows_max_id() {
        let g = gen_path(4).unwrap();
        assert_eq!(g.bit_length(), 2);
        let g = gen_path(5).unwrap();
        assert_eq!(g.bit_length(), 3);
        let g = Graph::from_edge_list(2, &[(0, 1)], Some(vec![0, 1000])).unwrap();
        assert_eq!(g.bit_length(), 10);
    }

    #[test]
    fn power_examples() {
        let p4 = gen_path(4).unwrap();
        assert_eq!(power(&p4, 1).unwrap(), p4);
        let sq = power(&p4, 2).unwrap();
        let edges: Vec<_> = sq.edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        let single = gen_path(1).unwrap();
        assert_eq!(power(&single, 5).unwrap().edge_count(), 0);
        assert!(power(&p4, 0).is_err());
    }

    #[test]
    fn bfs_examples() {
        let p4 = gen_path(4).unwrap();
        let d = bfs_distances(&p4, &[0]).to_vec();
        assert_eq!(d, vec![Some(0), Some(1), Some(2), Some(3)]);
        let d = bfs_distances(&p4, &[0, 3]).to_vec();
        assert_eq!(d, vec![Some(0), Some(1), Some(1), Some(0)]);
        let d = bfs_distances(&p4, &[]).to_vec();
        assert_eq!(d, vec![None; 4]);
    }

    #[test]
    fn torus_examples() {
        let c5 = gen_torus(1, 5).unwrap();
        assert!((0..5).all(|v| c5.degree(v) == 2));
        // 1-D torus is the cycle with the same labelling.
        assert_eq!(c5, gen_cycle(5).unwrap());

        let k9 = gen_torus(2, 3).unwrap();
        assert_eq!(k9, gen_complete(9).unwrap());

        let t = gen_torus(2, 4).unwrap();
        assert_eq!(t.node_count(), 16);
        assert!((0..16).all(|v| t.degree(v) == 8));
        assert!(gen_torus(2, 2).is_err());
    }

    #[test]
    fn torus_adjacency_matches_coordinate_rule() {
        let (dim, side) = (3u32, 4usize);
        let g = gen_torus(dim, side).unwrap();
        let coord = |mut v: usize| {
            (0..dim)
                .map(|_| {
                    let c = v % side;
                    v /= side;
                    c
                })
                .collect::<Vec<_>>()
        };
        for u in 0..g.node_count() {
            for v in 0..g.node_count() {
                let close = u != v
                    && coord(u).iter().zip(coord(v)).all(|(&a, b)| {
                        let d = (a + side - b) % side;
                        d <= 1 || d == side - 1
                    });
                assert_eq!(g.has_edge(u, v), close, "pair ({u}, {v})");
            }
        }
    }

    #[test]
    fn random_examples() {
        assert_eq!(gen_random(10, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(gen_random(10, 1.0, 1).unwrap(), gen_complete(10).unwrap());
        let a = gen_random(100, 0.05, 7).unwrap();
        let b = gen_random(100, 0.05, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random(100, 0.05, 8).unwrap());
        assert!(gen_random(5, 1.5, 0).is_err());
    }

    #[test]
    fn bfs_agrees_with_floyd_warshall() {
        for seed in 0..20 {
            let n = 5 + (seed as usize * 7) % 46;
            let g = gen_random(n, 0.08, seed).unwrap();
            let all = floyd_warshall(&g);
            for s in 0..n {
                assert_eq!(bfs_distances(&g, &[s]).to_vec(), all[s], "seed {seed} source {s}");
            }
        }
    }

    #[test]
    fn power_agrees_with_all_pairs_oracle() {
        for seed in 0..10 {
            let g = gen_random(30, 0.07, seed).unwrap();
            let all = floyd_warshall(&g);
            for k in 1..4 {
                let gk = power(&g, k).unwrap();
                for u in 0..30 {
                    for v in 0..30 {
                        let want = u != v && all[u][v].is_some_and(|d| d <= k);
                        assert_eq!(gk.has_edge(u, v), want);
                    }
                }
            }
        }
    }

    #[test]
    fn nested_powers_on_paths_and_cycles() {
        for g in [gen_path(17).unwrap(), gen_cycle(23).unwrap()] {
            for a in 1..4 {
                for b in 1..4 {
                    let nested = power(&power(&g, a).unwrap(), b).unwrap();
                    assert_eq!(nested, power(&g, a * b).unwrap());
                }
            }
        }
    }

    #[test]
    fn json_and_text_formats() {
        let g = gen_path(4).unwrap().with_ids(vec![3, 1, 2, 0]).unwrap();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(
            Graph::from_json(r#"{"n":3,"edges":[[0,1],[1,2]]}"#).unwrap(),
            gen_path(3).unwrap()
        );
        let text = "# a path\n0 1\n1 2 # middle\n\n2 3\n";
        assert_eq!(Graph::from_edge_list_text(text).unwrap(), gen_path(4).unwrap());
        assert!(Graph::from_edge_list_text("0 x\n").is_err());
        assert!(Graph::from_json("{\"n\": 2, \"edges\": [[0, 2]]}").is_err());
    }

    #[test]
    fn log_helpers() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(floor_log2(1), 0);
        assert_eq!(floor_log2(8), 3);
        assert_eq!(floor_log2(9), 3);
    }

    #[test]
    fn components() {
        let p = gen_path(6).unwrap();
        assert_eq!(components_within(&p, &[0, 1, 3, 4, 5]), vec![vec![0, 1], vec![3, 4, 5]]);
    }
}
