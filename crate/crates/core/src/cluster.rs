//! Cluster bookkeeping shared by the weak and power-graph constructions: labels, node
//! status, Steiner trees, per-phase reports, and the serialized decomposition type.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::engine::RoundLedger;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A `b`-bit cluster label; initially a node's identifier.
pub type Label = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Alive,
    Dead,
    /// Not part of the node set being clustered in this color.
    Outside,
}

/// Labels and status of every node during one color's construction.
#[derive(Debug, Clone)]
pub struct ClusterState {
    pub labels: Vec<Label>,
    pub status: Vec<NodeStatus>,
    pub phase: u32,
    pub step: u32,
}

impl ClusterState {
    /// Every node of `in_set` alive with its identifier as label; all others outside.
    pub fn new(g: &Graph, in_set: &[bool]) -> Self {
        let status = in_set
            .iter()
            .map(|&s| if s { NodeStatus::Alive } else { NodeStatus::Outside })
            .collect();
        Self { labels: g.ids().to_vec(), status, phase: 0, step: 0 }
    }

    pub fn is_alive(&self, v: usize) -> bool {
        self.status[v] == NodeStatus::Alive
    }

    pub fn alive_mask(&self) -> Vec<bool> {
        self.status.iter().map(|&s| s == NodeStatus::Alive).collect()
    }

    pub fn alive_count(&self) -> usize {
        self.status.iter().filter(|&&s| s == NodeStatus::Alive).count()
    }

    /// Phase-`i` role: alive node whose label has bit `i` clear.
    pub fn is_blue(&self, v: usize, bit: u32) -> bool {
        self.is_alive(v) && (self.labels[v] >> bit) & 1 == 0
    }

    pub fn is_red(&self, v: usize, bit: u32) -> bool {
        self.is_alive(v) && (self.labels[v] >> bit) & 1 == 1
    }

    /// Number of alive members per label.
    pub fn cluster_sizes(&self) -> HashMap<Label, usize> {
        let mut sizes = HashMap::new();
        for v in 0..self.labels.len() {
            if self.is_alive(v) {
                *sizes.entry(self.labels[v]).or_insert(0) += 1;
            }
        }
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub depth: u32,
}

/// Rooted tree over graph nodes. Nodes only ever join, and a node's parent never changes,
/// so depths are fixed at insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteinerTree {
    root: usize,
    nodes: BTreeMap<usize, TreeNode>,
    radius: u32,
}

impl SteinerTree {
    pub fn singleton(root: usize) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(root, TreeNode { parent: None, depth: 0 });
        Self { root, nodes, radius: 0 }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn node(&self, v: usize) -> Option<&TreeNode> {
        self.nodes.get(&v)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, &TreeNode)> {
        self.nodes.iter().map(|(&v, t)| (v, t))
    }

    /// Tree edges as `(child, parent)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().filter_map(|(&v, t)| t.parent.map(|p| (v, p)))
    }

    fn attach(&mut self, v: usize, parent: usize) -> Result<u32> {
        let pdepth = self
            .nodes
            .get(&parent)
            .ok_or_else(|| Error::Invariant(format!("tree rooted at {}: parent {parent} is not in the tree", self.root)))?
            .depth;
        if self.nodes.contains_key(&v) {
            return Err(Error::Invariant(format!("tree rooted at {}: node {v} attached twice", self.root)));
        }
        let depth = pdepth + 1;
        self.nodes.insert(v, TreeNode { parent: Some(parent), depth });
        self.radius = self.radius.max(depth);
        Ok(depth)
    }
}

/// One Steiner tree per label plus per-edge usage counters.
#[derive(Debug, Clone, Default)]
pub struct SteinerForest {
    trees: BTreeMap<Label, SteinerTree>,
    edge_use: HashMap<(usize, usize), u32>,
    max_multiplicity: u32,
}

impl SteinerForest {
    /// A singleton tree for every alive node, keyed by its label.
    pub fn singletons(state: &ClusterState) -> Self {
        let mut trees = BTreeMap::new();
        for v in 0..state.labels.len() {
            if state.is_alive(v) {
                trees.insert(state.labels[v], SteinerTree::singleton(v));
            }
        }
        Self { trees, edge_use: HashMap::new(), max_multiplicity: 0 }
    }

    pub fn tree(&self, label: Label) -> Option<&SteinerTree> {
        self.trees.get(&label)
    }

    pub fn trees(&self) -> impl Iterator<Item = (Label, &SteinerTree)> {
        self.trees.iter().map(|(&l, t)| (l, t))
    }

    /// Adds `v` to tree `label` as a child of `parent` (which must already be in it).
    pub fn attach(&mut self, label: Label, v: usize, parent: usize) -> Result<()> {
        let tree = self
            .trees
            .get_mut(&label)
            .ok_or_else(|| Error::Invariant(format!("no Steiner tree for label {label}")))?;
        tree.attach(v, parent)?;
        let key = (v.min(parent), v.max(parent));
        let count = self.edge_use.entry(key).or_insert(0);
        *count += 1;
        self.max_multiplicity = self.max_multiplicity.max(*count);
        Ok(())
    }

    /// Largest number of trees sharing one graph edge.
    pub fn max_multiplicity(&self) -> u32 {
        self.max_multiplicity
    }

    pub fn max_radius(&self) -> u32 {
        self.trees.values().map(SteinerTree::radius).max().unwrap_or(0)
    }
}

/// Statistics for one phase of one color.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseReport {
    pub phase: u32,
    pub alive_before: usize,
    pub alive_after: usize,
    pub deaths: usize,
    pub steps: u32,
    /// Most accepting steps taken by a single blue cluster.
    pub max_growth_steps: u32,
    pub max_tree_radius: u32,
    /// Most trees that gained the same edge during this phase.
    pub max_edge_multiplicity: u32,
    /// Proposals that reached an already stopped cluster.
    pub refused_without_kill: usize,
    /// Dead relays that moved to a new tree without getting strictly closer to the blue set.
    pub reanchor_violations: usize,
}

/// Snapshot handed to observers after each phase.
#[derive(Debug, Clone, Copy)]
pub struct PhaseView<'a> {
    pub phase: u32,
    pub labels: &'a [Label],
    pub alive: &'a [bool],
    pub forest: &'a SteinerForest,
    pub report: &'a PhaseReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub label: Label,
    pub members: Vec<usize>,
}

/// Outcome of clustering one color.
#[derive(Debug, Clone)]
pub struct OneColorResult {
    pub clustered: Vec<usize>,
    pub clusters: Vec<Cluster>,
    pub forest: SteinerForest,
    pub dead: Vec<usize>,
    pub ledger: RoundLedger,
    pub phases: Vec<PhaseReport>,
    pub input_size: usize,
    pub steps_per_phase: u64,
}

impl OneColorResult {
    pub(crate) fn finish(
        state: &ClusterState,
        forest: SteinerForest,
        ledger: RoundLedger,
        phases: Vec<PhaseReport>,
        input_size: usize,
        steps_per_phase: u64,
    ) -> Self {
        let mut by_label: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        let mut dead = Vec::new();
        for v in 0..state.labels.len() {
            match state.status[v] {
                NodeStatus::Alive => by_label.entry(state.labels[v]).or_default().push(v),
                NodeStatus::Dead => dead.push(v),
                NodeStatus::Outside => {}
            }
        }
        let clusters: Vec<Cluster> = by_label.into_iter().map(|(label, members)| Cluster { label, members }).collect();
        let mut clustered: Vec<usize> = clusters.iter().flat_map(|c| c.members.iter().copied()).collect();
        clustered.sort_unstable();
        Self { clustered, clusters, forest, dead, ledger, phases, input_size, steps_per_phase }
    }
}

/// `R = 10·b·⌈log₂ n⌉`, the step budget of one phase (and the per-phase radius allowance).
pub fn steps_per_phase(g: &Graph) -> u64 {
    10 * u64::from(g.bit_length()) * u64::from(g.log_n())
}

/// `4·b·⌈log₂ n⌉`, the most steps any blue cluster can keep growing in one phase.
pub fn growth_step_bound(g: &Graph) -> u64 {
    4 * u64::from(g.bit_length()) * u64::from(g.log_n())
}

/// Whether `p` proposals exceed `|A| / (2b)`, i.e. cluster `A` accepts them.
pub fn accepts(proposals: usize, cluster_size: usize, bits: u32) -> bool {
    (proposals as u128) * 2 * u128::from(bits) > cluster_size as u128
}

pub fn label_string(label: Label, bits: u32) -> String {
    format!("{:0width$b}", label, width = bits as usize)
}

pub fn parse_label(s: &str) -> Result<Label> {
    Label::from_str_radix(s, 2).map_err(|e| Error::Parse(format!("bad label {s:?}: {e}")))
}

/// Serialized Steiner tree: the root, every non-root node's parent, and the terminals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub root: usize,
    pub parent: BTreeMap<usize, usize>,
    pub terminals: Vec<usize>,
}

impl TreeRecord {
    /// Depth of the deepest node. Assumes the parent pointers lead to the root.
    pub fn radius(&self) -> u32 {
        let mut depth: BTreeMap<usize, u32> = BTreeMap::new();
        depth.insert(self.root, 0);
        let mut best = 0;
        for &v in self.parent.keys() {
            let mut path = Vec::new();
            let mut cur = v;
            while !depth.contains_key(&cur) && path.len() <= self.parent.len() {
                path.push(cur);
                cur = match self.parent.get(&cur) {
                    Some(&p) => p,
                    None => break,
                };
            }
            let mut d = depth.get(&cur).copied().unwrap_or(0);
            for &w in path.iter().rev() {
                d += 1;
                depth.insert(w, d);
            }
            best = best.max(depth.get(&v).copied().unwrap_or(0));
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub color: usize,
    /// Cluster label as a `b`-bit binary string.
    pub label: String,
    pub members: Vec<usize>,
    pub tree: TreeRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionKind {
    Weak,
    Power,
    Alt,
}

/// A weak-diameter decomposition: colors `1..=colors`, clusters with Steiner trees, and the
/// ledger of the run that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakDecomposition {
    pub kind: DecompositionKind,
    /// Same-color clusters are at least `k + 1` apart in the input graph.
    pub k: u32,
    pub colors: usize,
    pub color_of: Vec<usize>,
    pub clusters: Vec<ClusterRecord>,
    pub ledger: RoundLedger,
    /// Per-color construction statistics (not serialized).
    #[serde(skip)]
    pub color_stats: Vec<ColorStats>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColorStats {
    pub input_size: usize,
    pub clustered: usize,
    pub phases: Vec<PhaseReport>,
    pub max_multiplicity: u32,
}

impl WeakDecomposition {
    pub(crate) fn empty(kind: DecompositionKind, k: u32, n: usize, ledger: RoundLedger) -> Self {
        Self { kind, k, colors: 0, color_of: vec![0; n], clusters: Vec::new(), ledger, color_stats: Vec::new() }
    }

    /// Appends one color built by a one-color run.
    pub(crate) fn push_color(&mut self, result: &OneColorResult, bits: u32) {
        self.colors += 1;
        let color = self.colors;
        for c in &result.clusters {
            for &v in &c.members {
                self.color_of[v] = color;
            }
            let tree = result.forest.tree(c.label).expect("every cluster has a tree");
            self.clusters.push(ClusterRecord {
                color,
                label: label_string(c.label, bits),
                members: c.members.clone(),
                tree: TreeRecord {
                    root: tree.root(),
                    parent: tree.edges().collect(),
                    terminals: c.members.clone(),
                },
            });
        }
        self.ledger.absorb(&result.ledger);
        self.color_stats.push(ColorStats {
            input_size: result.input_size,
            clustered: result.clustered.len(),
            phases: result.phases.clone(),
            max_multiplicity: result.forest.max_multiplicity(),
        });
    }

    pub fn clusters_of_color(&self, color: usize) -> impl Iterator<Item = &ClusterRecord> {
        self.clusters.iter().filter(move |c| c.color == color)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
