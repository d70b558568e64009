//! `(2, b)`-ruling sets by bit-by-bit pruning, run as a per-node program.
//!
//! Round `i` looks at identifier bit `i - 1` (least significant first). A node still in
//! the candidate set whose bit is 1 leaves when some neighbor still in the set has bit 0,
//! and points at the smallest such neighbor identifier. After `b` rounds the survivors are
//! pairwise non-adjacent and every pruned node reaches a survivor along its pointers in at
//! most `b` hops.

use crate::engine::{run_sync, Message, Mode, NodeCtx, NodeProgram, Outbox, RoundLedger};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulingSetResult {
    /// Surviving nodes, sorted by index.
    pub members: Vec<usize>,
    /// For pruned nodes, the neighbor that caused the pruning.
    pub parent: Vec<Option<usize>>,
    /// Hops along parent pointers to a member; `None` outside the restricted set.
    pub depth: Vec<Option<u32>>,
    pub ledger: RoundLedger,
}

/// Presence announcement carrying the sender's identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Presence {
    pub id: u64,
    bits: u32,
}

impl Message for Presence {
    fn size_bits(&self) -> u64 {
        u64::from(self.bits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulingState {
    pub in_set: bool,
    pub parent: Option<usize>,
    /// Round in which the node left the candidate set.
    pub left_in_round: Option<u64>,
}

/// The pruning program. `active[v]` marks the nodes of the induced subgraph it runs on.
pub struct RulingProgram<'a> {
    pub active: &'a [bool],
    pub bits: u32,
}

impl RulingProgram<'_> {
    fn announce(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<Presence>) {
        for &w in ctx.neighbors {
            if self.active[w] {
                out.send(w, Presence { id: ctx.id, bits: self.bits });
            }
        }
    }
}

impl NodeProgram for RulingProgram<'_> {
    type State = RulingState;
    type Msg = Presence;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<Presence>) -> (RulingState, bool) {
        if !self.active[ctx.node] {
            return (RulingState { in_set: false, parent: None, left_in_round: None }, true);
        }
        self.announce(ctx, out);
        (RulingState { in_set: true, parent: None, left_in_round: None }, false)
    }

    fn on_round(
        &self,
        ctx: &NodeCtx<'_>,
        round: u64,
        state: &mut RulingState,
        inbox: &[(usize, Presence)],
        out: &mut Outbox<Presence>,
    ) -> bool {
        let bit = round - 1;
        if state.in_set && (ctx.id >> bit) & 1 == 1 {
            let dominator = inbox
                .iter()
                .filter(|(_, p)| (p.id >> bit) & 1 == 0)
                .min_by_key(|(_, p)| p.id);
            if let Some(&(from, _)) = dominator {
                state.in_set = false;
                state.parent = Some(from);
                state.left_in_round = Some(round);
            }
        }
        if round >= u64::from(self.bits) {
            return true;
        }
        if state.in_set {
            self.announce(ctx, out);
        }
        false
    }
}

/// Ruling set of `G[restrict_to]` in LOCAL mode.
pub fn ruling_set(g: &Graph, restrict_to: &[usize]) -> Result<RulingSetResult> {
    ruling_set_with_mode(g, restrict_to, Mode::Local)
}

pub fn ruling_set_with_mode(g: &Graph, restrict_to: &[usize], mode: Mode) -> Result<RulingSetResult> {
    if restrict_to.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let n = g.node_count();
    let mut active = vec![false; n];
    for &v in restrict_to {
        if v >= n {
            return Err(Error::NodeOutOfRange(v));
        }
        active[v] = true;
    }
    let bits = g.bit_length();
    let program = RulingProgram { active: &active, bits };
    let outcome = run_sync(g, &program, mode, u64::from(bits))?;
    if !outcome.all_halted {
        return Err(Error::Invariant("ruling-set program did not halt after b rounds".into()));
    }

    let members: Vec<usize> = (0..n).filter(|&v| outcome.states[v].in_set).collect();
    let parent: Vec<Option<usize>> = outcome.states.iter().map(|s| s.parent).collect();
    let mut depth = vec![None; n];
    for &m in &members {
        depth[m] = Some(0);
    }
    for v in 0..n {
        if !active[v] || depth[v].is_some() {
            continue;
        }
        let mut chain = vec![v];
        let mut cur = v;
        let base = loop {
            let p = parent[cur].ok_or_else(|| Error::Invariant(format!("pruned node {cur} has no parent")))?;
            if let Some(d) = depth[p] {
                break d;
            }
            chain.push(p);
            cur = p;
            if chain.len() > n {
                return Err(Error::Invariant("cycle in ruling-set parent pointers".into()));
            }
        };
        for (i, &w) in chain.iter().rev().enumerate() {
            depth[w] = Some(base + 1 + i as u32);
        }
    }
    Ok(RulingSetResult { members, parent, depth, ledger: outcome.ledger })
}
