//! One-color clustering by identifier-bit phases, and the weak-diameter decomposition that
//! repeats it on the nodes left dead.
//!
//! In phase `i` an alive node is blue when bit `i` of its label is 0 and red otherwise.
//! Every step, each red node adjacent to a blue cluster proposes to the smallest such label.
//! A blue cluster `A` with `p` proposals accepts them all when `2b·p > |A|`; otherwise the
//! proposers die and `A` stops growing for the rest of the phase.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::cluster::{
    accepts, steps_per_phase, ClusterState, DecompositionKind, Label, NodeStatus, OneColorResult, PhaseReport,
    PhaseView, SteinerForest, WeakDecomposition,
};
use crate::engine::{Mode, RoundLedger};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A red node's request to join blue cluster `label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Proposal {
    pub node: usize,
    pub label: Label,
}

/// Per-phase bookkeeping: which clusters stopped and how the forest changed.
#[derive(Debug, Clone)]
pub struct PhaseContext {
    pub bit: u32,
    pub stopped: BTreeSet<Label>,
    pub growth_steps: HashMap<Label, u32>,
    pub steps: u32,
    edge_use: HashMap<(usize, usize), u32>,
    max_edge_use: u32,
    /// Last (label, BFS iteration) under which a non-alive node joined a tree this phase.
    relay_anchor: HashMap<usize, (Label, u32)>,
    reanchor_violations: usize,
    refused_without_kill: usize,
}

impl PhaseContext {
    pub fn new(bit: u32) -> Self {
        Self {
            bit,
            stopped: BTreeSet::new(),
            growth_steps: HashMap::new(),
            steps: 0,
            edge_use: HashMap::new(),
            max_edge_use: 0,
            relay_anchor: HashMap::new(),
            reanchor_violations: 0,
            refused_without_kill: 0,
        }
    }

    pub(crate) fn attach(&mut self, forest: &mut SteinerForest, label: Label, v: usize, parent: usize) -> Result<()> {
        forest.attach(label, v, parent)?;
        let c = self.edge_use.entry((v.min(parent), v.max(parent))).or_insert(0);
        *c += 1;
        self.max_edge_use = self.max_edge_use.max(*c);
        Ok(())
    }

    pub(crate) fn note_relay_anchor(&mut self, v: usize, label: Label, iteration: u32) {
        if let Some(&(old, old_iter)) = self.relay_anchor.get(&v) {
            if old != label && iteration >= old_iter {
                self.reanchor_violations += 1;
            }
        }
        self.relay_anchor.insert(v, (label, iteration));
    }

    pub fn max_edge_multiplicity(&self) -> u32 {
        self.max_edge_use
    }
}

/// Outcome of resolving one step's proposals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub proposals: usize,
    /// Accepted proposers grouped by the cluster they joined.
    pub accepted: BTreeMap<Label, Vec<usize>>,
    pub killed: Vec<usize>,
    pub newly_stopped: Vec<Label>,
}

/// Each alive red node with an alive blue neighbor proposes to the smallest adjacent blue
/// label; the returned parent is the smallest-index neighbor carrying that label.
pub fn weak_proposals(g: &Graph, state: &ClusterState, bit: u32) -> Vec<(Proposal, usize)> {
    let mut out = Vec::new();
    for v in 0..g.node_count() {
        if !state.is_red(v, bit) {
            continue;
        }
        let best = g
            .neighbors(v)
            .iter()
            .filter(|&&w| state.is_blue(w, bit))
            .map(|&w| (state.labels[w], w))
            .min();
        if let Some((label, w)) = best {
            out.push((Proposal { node: v, label }, w));
        }
    }
    out
}

/// Applies the acceptance rule to every non-stopped blue cluster, using cluster sizes from
/// the start of the step. Proposals to stopped clusters are refused without killing.
pub(crate) fn resolve(state: &mut ClusterState, ctx: &mut PhaseContext, proposals: &[Proposal], bits: u32) -> StepOutcome {
    let sizes = state.cluster_sizes();
    let mut by_label: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for p in proposals {
        if ctx.stopped.contains(&p.label) {
            ctx.refused_without_kill += 1;
            continue;
        }
        by_label.entry(p.label).or_default().push(p.node);
    }
    let blue_labels: BTreeSet<Label> = (0..state.labels.len())
        .filter(|&v| state.is_blue(v, ctx.bit))
        .map(|v| state.labels[v])
        .collect();

    let mut outcome = StepOutcome { proposals: proposals.len(), ..Default::default() };
    for label in blue_labels {
        if ctx.stopped.contains(&label) {
            continue;
        }
        let proposers = by_label.remove(&label).unwrap_or_default();
        let size = sizes.get(&label).copied().unwrap_or(0);
        if accepts(proposers.len(), size, bits) {
            for &v in &proposers {
                state.labels[v] = label;
            }
            *ctx.growth_steps.entry(label).or_insert(0) += 1;
            outcome.accepted.insert(label, proposers);
        } else {
            for &v in &proposers {
                state.status[v] = NodeStatus::Dead;
            }
            outcome.killed.extend(proposers);
            ctx.stopped.insert(label);
            outcome.newly_stopped.push(label);
        }
    }
    outcome
}

fn max_active_radius(state: &ClusterState, forest: &SteinerForest, ctx: &PhaseContext) -> u32 {
    let mut labels = BTreeSet::new();
    for v in 0..state.labels.len() {
        if state.is_blue(v, ctx.bit) && !ctx.stopped.contains(&state.labels[v]) {
            labels.insert(state.labels[v]);
        }
    }
    labels.iter().filter_map(|&l| forest.tree(l)).map(|t| t.radius()).max().unwrap_or(0)
}

/// One step of the current phase. Returns `None` when no red node has a blue neighbor,
/// in which case nothing changed and nothing was charged.
pub fn run_step(
    g: &Graph,
    state: &mut ClusterState,
    forest: &mut SteinerForest,
    ctx: &mut PhaseContext,
    ledger: &mut RoundLedger,
) -> Result<Option<StepOutcome>> {
    let proposals = weak_proposals(g, state, ctx.bit);
    if proposals.is_empty() {
        return Ok(None);
    }
    if let Some((p, _)) = proposals.iter().find(|(p, _)| ctx.stopped.contains(&p.label)) {
        return Err(Error::Invariant(format!("node {} proposed to stopped cluster {}", p.node, p.label)));
    }
    let radius = max_active_radius(state, forest, ctx);
    let parent: HashMap<usize, usize> = proposals.iter().map(|(p, w)| (p.node, *w)).collect();
    let plain: Vec<Proposal> = proposals.iter().map(|(p, _)| *p).collect();
    let outcome = resolve(state, ctx, &plain, g.bit_length());
    for (&label, members) in &outcome.accepted {
        for &v in members {
            ctx.attach(forest, label, v, parent[&v])?;
        }
    }
    ctx.steps += 1;
    state.step = ctx.steps;
    ledger.charge_cluster_op(u64::from(radius) + 1, u64::from(forest.max_multiplicity()));
    Ok(Some(outcome))
}

/// Runs phase `bit` until no blue–red edge remains, at most `R` steps.
pub fn run_phase(
    g: &Graph,
    state: &mut ClusterState,
    forest: &mut SteinerForest,
    bit: u32,
    ledger: &mut RoundLedger,
) -> Result<PhaseReport> {
    let budget = steps_per_phase(g);
    let alive_before = state.alive_count();
    state.phase = bit;
    state.step = 0;
    let mut ctx = PhaseContext::new(bit);
    loop {
        if u64::from(ctx.steps) == budget {
            if !weak_proposals(g, state, bit).is_empty() {
                return Err(Error::Invariant(format!("phase {bit}: blue-red edge left after {budget} steps")));
            }
            break;
        }
        if run_step(g, state, forest, &mut ctx, ledger)?.is_none() {
            break;
        }
    }
    Ok(phase_report(state, forest, &ctx, alive_before))
}

pub(crate) fn phase_report(state: &ClusterState, forest: &SteinerForest, ctx: &PhaseContext, alive_before: usize) -> PhaseReport {
    let alive_after = state.alive_count();
    PhaseReport {
        phase: ctx.bit,
        alive_before,
        alive_after,
        deaths: alive_before - alive_after,
        steps: ctx.steps,
        max_growth_steps: ctx.growth_steps.values().copied().max().unwrap_or(0),
        max_tree_radius: forest.max_radius(),
        max_edge_multiplicity: ctx.max_edge_use,
        refused_without_kill: ctx.refused_without_kill,
        reanchor_violations: ctx.reanchor_violations,
    }
}

pub(crate) fn membership(g: &Graph, set: &[usize]) -> Result<Vec<bool>> {
    if set.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let mut mask = vec![false; g.node_count()];
    for &v in set {
        if v >= g.node_count() {
            return Err(Error::NodeOutOfRange(v));
        }
        mask[v] = true;
    }
    Ok(mask)
}

/// Clusters at least half of `set` into non-adjacent clusters with Steiner trees.
pub fn cluster_one_color(g: &Graph, set: &[usize]) -> Result<OneColorResult> {
    cluster_one_color_with(g, set, Mode::Local, &mut |_| {})
}

/// [`cluster_one_color`] with an explicit mode and a callback invoked after every phase.
pub fn cluster_one_color_with(
    g: &Graph,
    set: &[usize],
    mode: Mode,
    observer: &mut dyn FnMut(PhaseView<'_>),
) -> Result<OneColorResult> {
    let mask = membership(g, set)?;
    let input_size = mask.iter().filter(|&&b| b).count();
    let mut state = ClusterState::new(g, &mask);
    let mut forest = SteinerForest::singletons(&state);
    let mut ledger = RoundLedger::new(mode);
    let mut phases = Vec::new();
    for bit in 0..g.bit_length() {
        let report = run_phase(g, &mut state, &mut forest, bit, &mut ledger)?;
        let alive = state.alive_mask();
        observer(PhaseView { phase: bit, labels: &state.labels, alive: &alive, forest: &forest, report: &report });
        phases.push(report);
    }
    Ok(OneColorResult::finish(&state, forest, ledger, phases, input_size, steps_per_phase(g)))
}

/// Repeats one-color clustering on the remaining nodes until every node has a color.
pub fn weak_decomposition(g: &Graph) -> Result<WeakDecomposition> {
    weak_decomposition_with_mode(g, Mode::Local)
}

pub fn weak_decomposition_with_mode(g: &Graph, mode: Mode) -> Result<WeakDecomposition> {
    repeat_colors(g, DecompositionKind::Weak, 1, mode, |set| cluster_one_color_with(g, set, mode, &mut |_| {}))
}

pub(crate) fn repeat_colors(
    g: &Graph,
    kind: DecompositionKind,
    k: u32,
    mode: Mode,
    mut one_color: impl FnMut(&[usize]) -> Result<OneColorResult>,
) -> Result<WeakDecomposition> {
    let mut dec = WeakDecomposition::empty(kind, k, g.node_count(), RoundLedger::new(mode));
    let mut remaining: Vec<usize> = (0..g.node_count()).collect();
    while !remaining.is_empty() {
        let result = one_color(&remaining)?;
        if result.clustered.is_empty() {
            return Err(Error::Invariant("a color clustered no nodes".into()));
        }
        dec.push_color(&result, g.bit_length());
        remaining = result.dead;
    }
    Ok(dec)
}
