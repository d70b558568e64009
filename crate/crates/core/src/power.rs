//! The power-graph variant: red nodes up to `k` hops from a blue node propose, found by a
//! token BFS run from all blue nodes at once. Clusters of one color end up at least `k + 1`
//! hops apart in `G`, and Steiner trees may route through dead nodes and nodes outside the
//! set being clustered.
//!
//! A node keeps the first token it receives (smallest label, then smallest sender index).
//! If it received its first token in the same BFS iteration during the previous step of the
//! phase, it forwards the same token again, which keeps every node in at most one tree per
//! distance value. Proposers join the tree of the accepting cluster along their BFS parent
//! chain once the cluster accepts.

use crate::cluster::{
    steps_per_phase, ClusterState, DecompositionKind, Label, OneColorResult, PhaseReport, PhaseView, SteinerForest,
    WeakDecomposition,
};
use crate::engine::{run_sync, Message, Mode, NodeCtx, NodeProgram, Outbox, RoundLedger};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::weak::{membership, phase_report, repeat_colors, resolve, PhaseContext, Proposal};

/// Where and from whom a node first received a token during one BFS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenRecord {
    /// BFS iteration (hop distance to the blue set), starting at 1.
    pub iteration: u32,
    pub label: Label,
    pub parent: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Blue(Label),
    Red,
    Relay,
}

#[derive(Debug, Clone, Copy)]
struct Token {
    label: Label,
    bits: u32,
}

impl Message for Token {
    fn size_bits(&self) -> u64 {
        u64::from(self.bits)
    }
}

struct TokenBfs<'a> {
    roles: &'a [Role],
    previous: &'a [Option<TokenRecord>],
    k: u32,
    bits: u32,
}

#[derive(Debug, Default)]
struct TokenState {
    record: Option<TokenRecord>,
    reused: bool,
    fallback: bool,
}

impl NodeProgram for TokenBfs<'_> {
    type State = TokenState;
    type Msg = Token;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<Token>) -> (TokenState, bool) {
        match self.roles[ctx.node] {
            Role::Blue(label) => {
                out.broadcast(ctx, Token { label, bits: self.bits });
                (TokenState::default(), true)
            }
            Role::Red | Role::Relay => (TokenState::default(), false),
        }
    }

    fn on_round(
        &self,
        ctx: &NodeCtx<'_>,
        round: u64,
        state: &mut TokenState,
        inbox: &[(usize, Token)],
        out: &mut Outbox<Token>,
    ) -> bool {
        let iteration = round as u32;
        if inbox.is_empty() {
            return iteration >= self.k;
        }
        let fresh = || {
            let &(parent, tok) = inbox.iter().min_by_key(|(from, t)| (t.label, *from)).expect("inbox is non-empty");
            TokenRecord { iteration, label: tok.label, parent }
        };
        let record = match self.previous[ctx.node] {
            Some(prev) if prev.iteration == iteration => {
                if inbox.iter().any(|&(from, t)| from == prev.parent && t.label == prev.label) {
                    state.reused = true;
                    prev
                } else {
                    state.fallback = true;
                    fresh()
                }
            }
            _ => fresh(),
        };
        state.record = Some(record);
        if iteration < self.k {
            out.broadcast(ctx, Token { label: record.label, bits: self.bits });
        }
        true
    }
}

/// Result of one token BFS.
#[derive(Debug, Clone)]
pub struct TokenBfsOutcome {
    pub records: Vec<Option<TokenRecord>>,
    pub ledger: RoundLedger,
    /// Nodes that repeated their previous token.
    pub reused: usize,
    /// Nodes whose previous parent no longer sent the previous token.
    pub fallbacks: usize,
}

/// Runs `k` iterations of token BFS from all blue nodes of phase `bit` as a per-node program.
pub fn token_bfs(
    g: &Graph,
    state: &ClusterState,
    bit: u32,
    k: u32,
    previous: &[Option<TokenRecord>],
    mode: Mode,
) -> Result<TokenBfsOutcome> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let roles: Vec<Role> = (0..g.node_count())
        .map(|v| {
            if state.is_blue(v, bit) {
                Role::Blue(state.labels[v])
            } else if state.is_red(v, bit) {
                Role::Red
            } else {
                Role::Relay
            }
        })
        .collect();
    let program = TokenBfs { roles: &roles, previous, k, bits: g.bit_length() };
    let outcome = run_sync(g, &program, mode, u64::from(k))?;
    let reused = outcome.states.iter().filter(|s| s.reused).count();
    let fallbacks = outcome.states.iter().filter(|s| s.fallback).count();
    Ok(TokenBfsOutcome {
        records: outcome.states.into_iter().map(|s| s.record).collect(),
        ledger: outcome.ledger,
        reused,
        fallbacks,
    })
}

/// One step: token BFS, proposals from every alive red node reached, acceptance decisions,
/// and tree growth along BFS parent chains. Returns `false` when nobody proposed.
pub fn token_bfs_step(
    g: &Graph,
    state: &mut ClusterState,
    forest: &mut SteinerForest,
    ctx: &mut PhaseContext,
    k: u32,
    previous: &mut Vec<Option<TokenRecord>>,
    ledger: &mut RoundLedger,
) -> Result<bool> {
    let bfs = token_bfs(g, state, ctx.bit, k, previous, ledger.mode())?;
    let proposals: Vec<Proposal> = (0..g.node_count())
        .filter(|&v| state.is_red(v, ctx.bit))
        .filter_map(|v| bfs.records[v].map(|r| Proposal { node: v, label: r.label }))
        .collect();
    if proposals.is_empty() {
        return Ok(false);
    }
    let radius = active_radius(state, forest, ctx);
    ledger.absorb(&bfs.ledger);

    let outcome = resolve(state, ctx, &proposals, g.bit_length());
    for (&label, members) in &outcome.accepted {
        for &v in members {
            attach_chain(state, forest, ctx, &bfs.records, label, v, k)?;
        }
    }
    ctx.steps += 1;
    state.step = ctx.steps;
    ledger.charge_cluster_op(u64::from(radius) + u64::from(k), u64::from(forest.max_multiplicity()));
    *previous = bfs.records;
    Ok(true)
}

fn active_radius(state: &ClusterState, forest: &SteinerForest, ctx: &PhaseContext) -> u32 {
    (0..state.labels.len())
        .filter(|&v| state.is_blue(v, ctx.bit) && !ctx.stopped.contains(&state.labels[v]))
        .filter_map(|v| forest.tree(state.labels[v]))
        .map(|t| t.radius())
        .max()
        .unwrap_or(0)
}

/// Walks BFS parents from `v` up to the first node already in the tree of `label`, then
/// attaches the walked nodes top-down.
fn attach_chain(
    state: &ClusterState,
    forest: &mut SteinerForest,
    ctx: &mut PhaseContext,
    records: &[Option<TokenRecord>],
    label: Label,
    v: usize,
    k: u32,
) -> Result<()> {
    let mut chain = Vec::new();
    let mut cur = v;
    while !forest.tree(label).is_some_and(|t| t.contains(cur)) {
        let rec = records[cur].ok_or_else(|| Error::Invariant(format!("node {cur} on a proposal path has no token")))?;
        if rec.label != label {
            return Err(Error::Invariant(format!(
                "node {cur} forwards token {} on a path to cluster {label}",
                rec.label
            )));
        }
        chain.push((cur, rec));
        cur = rec.parent;
        if chain.len() > k as usize {
            return Err(Error::Invariant(format!("proposal path from {v} is longer than {k} hops")));
        }
    }
    for &(node, rec) in chain.iter().rev() {
        ctx.attach(forest, label, node, rec.parent)?;
        if !state.is_alive(node) {
            ctx.note_relay_anchor(node, label, rec.iteration);
        }
    }
    Ok(())
}

/// Runs phase `bit` with `k`-hop proposals.
pub fn run_power_phase(
    g: &Graph,
    state: &mut ClusterState,
    forest: &mut SteinerForest,
    bit: u32,
    k: u32,
    ledger: &mut RoundLedger,
) -> Result<PhaseReport> {
    let budget = steps_per_phase(g);
    let alive_before = state.alive_count();
    state.phase = bit;
    state.step = 0;
    let mut ctx = PhaseContext::new(bit);
    let mut previous = vec![None; g.node_count()];
    loop {
        if u64::from(ctx.steps) == budget {
            let bfs = token_bfs(g, state, bit, k, &previous, ledger.mode())?;
            if (0..g.node_count()).any(|v| state.is_red(v, bit) && bfs.records[v].is_some()) {
                return Err(Error::Invariant(format!(
                    "phase {bit}: red node within {k} hops of a blue node after {budget} steps"
                )));
            }
            break;
        }
        if !token_bfs_step(g, state, forest, &mut ctx, k, &mut previous, ledger)? {
            break;
        }
    }
    Ok(phase_report(state, forest, &ctx, alive_before))
}

/// One-color clustering whose clusters are pairwise at least `k + 1` apart in `G`.
pub fn cluster_one_color_power(g: &Graph, set: &[usize], k: u32) -> Result<OneColorResult> {
    cluster_one_color_power_with(g, set, k, Mode::Local, &mut |_| {})
}

pub fn cluster_one_color_power_with(
    g: &Graph,
    set: &[usize],
    k: u32,
    mode: Mode,
    observer: &mut dyn FnMut(PhaseView<'_>),
) -> Result<OneColorResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mask = membership(g, set)?;
    let input_size = set.len();
    let mut state = ClusterState::new(g, &mask);
    let mut forest = SteinerForest::singletons(&state);
    let mut ledger = RoundLedger::new(mode);
    let mut phases = Vec::new();
    for bit in 0..g.bit_length() {
        let report = run_power_phase(g, &mut state, &mut forest, bit, k, &mut ledger)?;
        let alive = state.alive_mask();
        observer(PhaseView { phase: bit, labels: &state.labels, alive: &alive, forest: &forest, report: &report });
        phases.push(report);
    }
    Ok(OneColorResult::finish(&state, forest, ledger, phases, input_size, steps_per_phase(g)))
}

/// Weak-diameter decomposition of `G^k`, computed on `G` with `k`-hop token BFS.
pub fn power_decomposition(g: &Graph, k: u32) -> Result<WeakDecomposition> {
    power_decomposition_with_mode(g, k, Mode::Local)
}

pub fn power_decomposition_with_mode(g: &Graph, k: u32, mode: Mode) -> Result<WeakDecomposition> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    repeat_colors(g, DecompositionKind::Power, k, mode, |set| {
        cluster_one_color_power_with(g, set, k, mode, &mut |_| {})
    })
}
