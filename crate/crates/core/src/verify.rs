//! Brute-force checkers for every output type. They only rely on the graph and plain BFS,
//! never on the data structures used while building the outputs.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cluster::{ClusterRecord, WeakDecomposition};
use crate::graph::{bfs_distances, bfs_restricted, ceil_log2, components_within, floor_log2, Graph};
use crate::strong::StrongDecomposition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Counterexample for a failed check.
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, witness: Option<Value>) {
        self.checks.push(Check { name: name.into(), pass: witness.is_none(), witness });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Closest pair of nodes from different groups: `(distance, x, y)`.
///
/// Multi-source BFS assigns every node its nearest group; the minimum over edges joining
/// two regions of `d(x) + 1 + d(y)` is exactly the smallest inter-group distance.
pub fn closest_groups(g: &Graph, group: &[Option<u64>]) -> Option<(u32, usize, usize)> {
    let n = g.node_count();
    let mut dist = vec![u32::MAX; n];
    let mut source = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if group[v].is_some() {
            dist[v] = 0;
            source[v] = v;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                source[w] = source[u];
                queue.push_back(w);
            }
        }
    }
    let mut best: Option<(u32, usize, usize)> = None;
    for (x, y) in g.edges() {
        if dist[x] == u32::MAX || dist[y] == u32::MAX {
            continue;
        }
        let (sx, sy) = (source[x], source[y]);
        if group[sx] != group[sy] {
            let d = dist[x] + dist[y] + 1;
            let cand = (d, sx.min(sy), sx.max(sy));
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Bounds applied by [`verify_weak`]; `None` skips the check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeakBounds {
    /// Same-color clusters must be at least `k + 1` apart.
    pub k: u32,
    pub radius_bound: Option<u64>,
    pub color_bound: Option<usize>,
    /// Largest number of same-color trees allowed on one edge.
    pub congestion_bound: Option<u64>,
}

impl WeakBounds {
    /// Bounds for the bit-phase construction on `g^k`: `c ≤ ⌊log₂ n⌋ + 1`, radius
    /// `≤ b·k·R` with `R = 10·b·⌈log₂ n⌉`, and at most `b` trees per edge and color for `k = 1`.
    pub fn standard(g: &Graph, k: u32) -> Self {
        let n = g.node_count();
        let b = u64::from(g.bit_length());
        let log_n = u64::from(ceil_log2(n));
        let r = 10 * b * log_n;
        let growth = 4 * b * log_n;
        Self {
            k,
            radius_bound: Some(b * u64::from(k) * r),
            color_bound: Some(floor_log2(n) as usize + 1),
            congestion_bound: Some(b * u64::from(k).min(growth.max(1))),
        }
    }

    pub fn separation_only(k: u32) -> Self {
        Self { k, radius_bound: None, color_bound: None, congestion_bound: None }
    }
}

struct TreeShape {
    depth: BTreeMap<usize, u32>,
}

fn tree_shape(g: &Graph, c: &ClusterRecord) -> Result<TreeShape, Value> {
    let t = &c.tree;
    let mut nodes: BTreeSet<usize> = t.parent.keys().copied().collect();
    nodes.insert(t.root);
    if t.parent.contains_key(&t.root) {
        return Err(json!({"cluster": c.label, "root_has_parent": t.root}));
    }
    for (&child, &parent) in &t.parent {
        if child >= g.node_count() || parent >= g.node_count() {
            return Err(json!({"cluster": c.label, "node_out_of_range": [child, parent]}));
        }
        if !nodes.contains(&parent) {
            return Err(json!({"cluster": c.label, "dangling_parent": [child, parent]}));
        }
        if !g.has_edge(child, parent) {
            return Err(json!({"cluster": c.label, "non_edge": [child, parent]}));
        }
    }
    let mut depth = BTreeMap::new();
    depth.insert(t.root, 0u32);
    for &v in &nodes {
        let mut path = Vec::new();
        let mut cur = v;
        while !depth.contains_key(&cur) {
            if path.len() > nodes.len() {
                return Err(json!({"cluster": c.label, "cycle_through": v}));
            }
            path.push(cur);
            cur = t.parent[&cur];
        }
        let mut d = depth[&cur];
        for &w in path.iter().rev() {
            d += 1;
            depth.insert(w, d);
        }
    }
    let terminals: BTreeSet<usize> = t.terminals.iter().copied().collect();
    let members: BTreeSet<usize> = c.members.iter().copied().collect();
    if terminals != members {
        return Err(json!({"cluster": c.label, "terminals": t.terminals, "members": c.members}));
    }
    if let Some(&m) = members.iter().find(|m| !nodes.contains(m)) {
        return Err(json!({"cluster": c.label, "member_not_in_tree": m}));
    }
    Ok(TreeShape { depth })
}

/// Checks a weak-diameter decomposition against `bounds`.
pub fn verify_weak(g: &Graph, dec: &WeakDecomposition, bounds: WeakBounds) -> Report {
    let n = g.node_count();
    let mut report = Report::default();

    // Totality and consistency between color_of and the cluster lists.
    let mut seen: Vec<Option<usize>> = vec![None; n];
    let mut witness = None;
    if dec.color_of.len() != n {
        witness = Some(json!({"color_of_len": dec.color_of.len(), "n": n}));
    } else {
        for c in &dec.clusters {
            for &v in &c.members {
                if v >= n || seen[v].is_some() || dec.color_of[v] != c.color {
                    witness = Some(json!({"node": v, "cluster": c.label, "color": c.color}));
                    break;
                }
                seen[v] = Some(c.color);
            }
            if witness.is_some() {
                break;
            }
        }
        if witness.is_none() {
            if let Some(v) = (0..n).find(|&v| seen[v].is_none() || dec.color_of[v] == 0 || dec.color_of[v] > dec.colors) {
                witness = Some(json!({"uncovered_node": v}));
            }
        }
    }
    let total = witness.is_none();
    report.push("totality", witness);
    if !total {
        return report;
    }

    // Same-color clusters at least k + 1 apart.
    let mut witness = None;
    for color in 1..=dec.colors {
        let mut group = vec![None; n];
        for (i, c) in dec.clusters.iter().enumerate().filter(|(_, c)| c.color == color) {
            for &v in &c.members {
                group[v] = Some(i as u64);
            }
        }
        if let Some((d, x, y)) = closest_groups(g, &group) {
            if d <= bounds.k {
                witness = Some(json!({"color": color, "nodes": [x, y], "distance": d, "required": bounds.k + 1}));
                break;
            }
        }
    }
    report.push("separation", witness);

    let shapes: Vec<Result<TreeShape, Value>> = dec.clusters.par_iter().map(|c| tree_shape(g, c)).collect();
    let witness = shapes.iter().find_map(|s| s.as_ref().err().cloned());
    let trees_ok = witness.is_none();
    report.push("tree-structure", witness);
    if !trees_ok {
        return report;
    }
    let shapes: Vec<TreeShape> = shapes.into_iter().map(|s| s.expect("checked above")).collect();
    let radii: Vec<u32> = shapes.iter().map(|s| s.depth.values().copied().max().unwrap_or(0)).collect();

    if let Some(bound) = bounds.radius_bound {
        let witness = radii
            .iter()
            .enumerate()
            .find(|(_, &r)| u64::from(r) > bound)
            .map(|(i, &r)| json!({"cluster": dec.clusters[i].label, "color": dec.clusters[i].color, "radius": r, "bound": bound}));
        report.push("tree-radius", witness);
    }

    // Weak diameter: every member within `radius` of the root in G, and for small clusters
    // the exact pairwise maximum is at most twice the radius.
    let witness = dec
        .clusters
        .par_iter()
        .zip(radii.par_iter())
        .find_map_first(|(c, &r)| {
            let d = bfs_distances(g, &[c.tree.root]);
            if let Some(&m) = c.members.iter().find(|&&m| d.get(m).is_none_or(|x| x > r)) {
                return Some(json!({"cluster": c.label, "member": m, "root": c.tree.root, "radius": r}));
            }
            if c.members.len() <= 64 {
                for &a in &c.members {
                    let da = bfs_distances(g, &[a]);
                    for &b in &c.members {
                        let x = da.get(b).unwrap_or(u32::MAX);
                        if x > 2 * r {
                            return Some(json!({"cluster": c.label, "pair": [a, b], "distance": x, "radius": r}));
                        }
                    }
                }
            }
            None
        });
    report.push("weak-diameter", witness);

    if let Some(bound) = bounds.color_bound {
        let witness = (dec.colors > bound).then(|| json!({"colors": dec.colors, "bound": bound}));
        report.push("color-bound", witness);
    }

    if let Some(bound) = bounds.congestion_bound {
        let mut witness = None;
        for color in 1..=dec.colors {
            let mut uses: HashMap<(usize, usize), u64> = HashMap::new();
            for c in dec.clusters.iter().filter(|c| c.color == color) {
                for (&a, &b) in &c.tree.parent {
                    *uses.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
            if let Some((e, &m)) = uses.iter().filter(|(_, &m)| m > bound).min() {
                witness = Some(json!({"color": color, "edge": [e.0, e.1], "trees": m, "bound": bound}));
                break;
            }
        }
        report.push("congestion", witness);
    }
    report
}

/// Exact diameter of a connected node set inside the induced subgraph, with a farthest pair.
fn induced_diameter(g: &Graph, members: &[usize]) -> (u32, usize, usize) {
    let mut allowed = vec![false; g.node_count()];
    for &v in members {
        allowed[v] = true;
    }
    members
        .par_iter()
        .map(|&a| {
            let d = bfs_restricted(g, &[a], Some(&allowed), None);
            members
                .iter()
                .map(|&b| (d.get(b).unwrap_or(u32::MAX), a, b))
                .max_by_key(|x| x.0)
                .unwrap_or((0, a, a))
        })
        .max_by_key(|x| (x.0, std::cmp::Reverse((x.1, x.2))))
        .unwrap_or((0, 0, 0))
}

/// Checks that every component of every color class has diameter at most `diameter_bound`.
pub fn verify_strong(g: &Graph, dec: &StrongDecomposition, diameter_bound: u32, color_bound: usize) -> Report {
    let n = g.node_count();
    let mut report = Report::default();
    let witness = if dec.color_of.len() != n {
        Some(json!({"color_of_len": dec.color_of.len(), "n": n}))
    } else {
        (0..n)
            .find(|&v| dec.color_of[v] == 0 || dec.color_of[v] > dec.colors)
            .map(|v| json!({"node": v, "color": dec.color_of[v]}))
    };
    let total = witness.is_none();
    report.push("totality", witness);
    if !total {
        return report;
    }
    let mut witness = None;
    for color in 1..=dec.colors {
        let class: Vec<usize> = (0..n).filter(|&v| dec.color_of[v] == color).collect();
        for comp in components_within(g, &class) {
            let (d, a, b) = induced_diameter(g, &comp);
            if d > diameter_bound {
                witness = Some(json!({"color": color, "pair": [a, b], "diameter": d, "bound": diameter_bound}));
                break;
            }
        }
        if witness.is_some() {
            break;
        }
    }
    report.push("strong-diameter", witness);
    let witness = (dec.colors > color_bound).then(|| json!({"colors": dec.colors, "bound": color_bound}));
    report.push("color-bound", witness);
    report
}

fn membership_mask(g: &Graph, nodes: &[usize]) -> Result<Vec<bool>, Value> {
    let mut mask = vec![false; g.node_count()];
    for &v in nodes {
        if v >= g.node_count() {
            return Err(json!({"node_out_of_range": v}));
        }
        mask[v] = true;
    }
    Ok(mask)
}

pub fn verify_mis(g: &Graph, members: &[usize]) -> Report {
    let mut report = Report::default();
    let mask = match membership_mask(g, members) {
        Ok(m) => m,
        Err(w) => {
            report.push("nodes", Some(w));
            return report;
        }
    };
    let witness = g.edges().find(|&(u, v)| mask[u] && mask[v]).map(|(u, v)| json!({"edge": [u, v]}));
    report.push("independence", witness);
    let witness = (0..g.node_count())
        .find(|&v| !mask[v] && !g.neighbors(v).iter().any(|&w| mask[w]))
        .map(|v| json!({"undominated": v}));
    report.push("maximality", witness);
    report
}

/// Properness, plus list membership when `lists` is given, or palette `{0..Δ}` otherwise.
pub fn verify_coloring(g: &Graph, colors: &[u64], lists: Option<&[Vec<u64>]>) -> Report {
    let mut report = Report::default();
    if colors.len() != g.node_count() {
        report.push("totality", Some(json!({"colors_len": colors.len(), "n": g.node_count()})));
        return report;
    }
    let witness = g.edges().find(|&(u, v)| colors[u] == colors[v]).map(|(u, v)| json!({"edge": [u, v], "color": colors[u]}));
    report.push("proper", witness);
    match lists {
        Some(lists) => {
            let witness = (0..g.node_count())
                .find(|&v| lists.get(v).is_none_or(|l| !l.contains(&colors[v])))
                .map(|v| json!({"node": v, "color": colors[v]}));
            report.push("in-list", witness);
        }
        None => {
            let delta = g.max_degree() as u64;
            let witness = (0..g.node_count())
                .find(|&v| colors[v] > delta)
                .map(|v| json!({"node": v, "color": colors[v], "max_allowed": delta}));
            report.push("palette", witness);
        }
    }
    report
}

/// Members pairwise non-adjacent in `G[restrict]` and every node of `restrict` within
/// `beta` hops (inside `G[restrict]`) of a member.
pub fn verify_ruling(g: &Graph, members: &[usize], restrict: &[usize], beta: u32) -> Report {
    let mut report = Report::default();
    let (mask, inside) = match (membership_mask(g, members), membership_mask(g, restrict)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(w), _) | (_, Err(w)) => {
            report.push("nodes", Some(w));
            return report;
        }
    };
    let witness = members.iter().find(|&&v| !inside[v]).map(|&v| json!({"member_outside": v}));
    report.push("members-in-set", witness);
    let witness = g.edges().find(|&(u, v)| mask[u] && mask[v]).map(|(u, v)| json!({"edge": [u, v]}));
    report.push("independence", witness);
    let d = bfs_restricted(g, members, Some(&inside), None);
    let witness = restrict
        .iter()
        .find(|&&v| d.get(v).is_none_or(|x| x > beta))
        .map(|&v| json!({"node": v, "distance": d.get(v), "beta": beta}));
    report.push("domination", witness);
    report
}

/// Phase separation at `k` hops: alive nodes whose labels differ in the lowest
/// `suffix_bits` bits are more than `k` apart in `G`.
pub fn check_suffix_separation(g: &Graph, labels: &[u64], alive: &[bool], suffix_bits: u32, k: u32) -> Check {
    let mask = if suffix_bits >= 64 { u64::MAX } else { (1u64 << suffix_bits) - 1 };
    let group: Vec<Option<u64>> = (0..g.node_count()).map(|v| alive[v].then(|| labels[v] & mask)).collect();
    let witness = closest_groups(g, &group)
        .filter(|&(d, _, _)| d <= k)
        .map(|(d, x, y)| json!({"nodes": [x, y], "distance": d, "suffix_bits": suffix_bits}));
    Check { name: "suffix-separation".into(), pass: witness.is_none(), witness }
}

/// Per-phase survival: `after ≥ before·(1 − 1/(2b))`.
pub fn check_survival(before: usize, after: usize, bits: u32) -> Check {
    let two_b = 2 * u128::from(bits);
    let ok = two_b * after as u128 >= (two_b - 1) * before as u128;
    let witness = (!ok).then(|| json!({"before": before, "after": after, "bits": bits}));
    Check { name: "survival".into(), pass: ok, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{DecompositionKind, TreeRecord};
    use crate::engine::{Mode, RoundLedger};
    use crate::graph::{gen_path, gen_random};
    use crate::weak::weak_decomposition;

    fn naive_closest(g: &Graph, group: &[Option<u64>]) -> Option<u32> {
        let n = g.node_count();
        let mut best = None;
        for x in 0..n {
            let Some(gx) = group[x] else { continue };
            let d = bfs_distances(g, &[x]);
            for y in 0..n {
                if let (Some(gy), Some(dy)) = (group[y], d.get(y)) {
                    if gy != gx {
                        best = Some(best.map_or(dy, |b: u32| b.min(dy)));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn closest_groups_matches_naive_pairs() {
        for seed in 0..25 {
            let g = gen_random(35, 0.06, seed).unwrap();
            let group: Vec<Option<u64>> =
                (0..35).map(|v| if (v * 13 + seed as usize).is_multiple_of(4) { None } else { Some((v % 5) as u64) }).collect();
            assert_eq!(closest_groups(&g, &group).map(|x| x.0), naive_closest(&g, &group), "seed {seed}");
        }
    }

    fn singleton_dec(color_of: Vec<usize>, clusters: Vec<ClusterRecord>, colors: usize) -> WeakDecomposition {
        WeakDecomposition {
            kind: DecompositionKind::Weak,
            k: 1,
            colors,
            color_of,
            clusters,
            ledger: RoundLedger::new(Mode::Local),
            color_stats: Vec::new(),
        }
    }

    fn single(v: usize, color: usize) -> ClusterRecord {
        ClusterRecord {
            color,
            label: format!("{v}"),
            members: vec![v],
            tree: TreeRecord { root: v, parent: BTreeMap::new(), terminals: vec![v] },
        }
    }

    #[test]
    fn weak_pass_and_constructed_failure() {
        let one = gen_path(1).unwrap();
        let dec = singleton_dec(vec![1], vec![single(0, 1)], 1);
        assert!(verify_weak(&one, &dec, WeakBounds::standard(&one, 1)).passed());

        let p2 = gen_path(2).unwrap();
        let bad = singleton_dec(vec![1, 1], vec![single(0, 1), single(1, 1)], 1);
        let r = verify_weak(&p2, &bad, WeakBounds::standard(&p2, 1));
        let sep = r.check("separation").unwrap();
        assert!(!sep.pass);
        assert_eq!(sep.witness.as_ref().unwrap()["nodes"], json!([0, 1]));

        let g = gen_random(128, 0.05, 2).unwrap();
        let dec = weak_decomposition(&g).unwrap();
        let r = verify_weak(&g, &dec, WeakBounds::standard(&g, 1));
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn broken_trees_are_reported() {
        let p3 = gen_path(3).unwrap();
        let mut c = ClusterRecord {
            color: 1,
            label: "0".into(),
            members: vec![0, 2],
            tree: TreeRecord { root: 0, parent: BTreeMap::from([(2, 0)]), terminals: vec![0, 2] },
        };
        let dec = singleton_dec(vec![1, 2, 1], vec![c.clone(), single(1, 2)], 2);
        assert!(!verify_weak(&p3, &dec, WeakBounds::separation_only(1)).check("tree-structure").unwrap().pass);
        c.tree.parent = BTreeMap::from([(1, 0), (2, 1)]);
        c.tree.terminals = vec![0];
        let dec = singleton_dec(vec![1, 2, 1], vec![c, single(1, 2)], 2);
        assert!(!verify_weak(&p3, &dec, WeakBounds::separation_only(1)).check("tree-structure").unwrap().pass);
    }

    #[test]
    fn strong_cases() {
        let one = gen_path(1).unwrap();
        let dec = StrongDecomposition {
            colors: 1,
            color_of: vec![1],
            ledger: RoundLedger::new(Mode::Local),
            color_stats: Vec::new(),
            helper_k: 1,
            helper_colors: 1,
            helper_min_separation: None,
        };
        assert!(verify_strong(&one, &dec, 0, 1).passed());

        let p8 = gen_path(8).unwrap();
        let mut bad = dec.clone();
        bad.color_of = vec![1; 8];
        let r = verify_strong(&p8, &bad, 6, 4);
        let c = r.check("strong-diameter").unwrap();
        assert!(!c.pass);
        assert_eq!(c.witness.as_ref().unwrap()["diameter"], json!(7));

        let good = crate::strong::strong_decomposition(&p8).unwrap();
        assert!(verify_strong(&p8, &good, 6, 4).passed());
    }

    #[test]
    fn mis_coloring_ruling_cases() {
        let one = gen_path(1).unwrap();
        assert!(verify_mis(&one, &[0]).passed());
        assert!(verify_coloring(&one, &[0], None).passed());
        assert!(verify_ruling(&one, &[0], &[0], 1).passed());

        let p3 = gen_path(3).unwrap();
        assert!(!verify_mis(&p3, &[0, 1]).check("independence").unwrap().pass);
        assert!(!verify_mis(&p3, &[0]).check("maximality").unwrap().pass);
        assert!(!verify_coloring(&p3, &[0, 0, 1], None).check("proper").unwrap().pass);
        assert!(!verify_coloring(&p3, &[0, 1, 0], Some(&[vec![1], vec![1], vec![0]])).passed());
        assert!(!verify_ruling(&p3, &[0], &[0, 1, 2], 1).check("domination").unwrap().pass);

        let g = gen_random(100, 0.05, 9).unwrap();
        let m = crate::apps::mis(&g).unwrap();
        assert!(verify_mis(&g, &m.members).passed());
        let c = crate::apps::delta_plus_one_coloring(&g).unwrap();
        assert!(verify_coloring(&g, &c.colors, None).passed());
        let all: Vec<usize> = (0..100).collect();
        let r = crate::ruling::ruling_set(&g, &all).unwrap();
        assert!(verify_ruling(&g, &r.members, &all, g.bit_length()).passed());
    }

    #[test]
    fn survival_arithmetic() {
        assert!(check_survival(8, 6, 2).pass);
        assert!(!check_survival(8, 5, 2).pass);
    }
}
