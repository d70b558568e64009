//! Round-synchronous message passing with LOCAL/CONGEST accounting.
//!
//! A [`NodeProgram`] is instantiated once per node. In every round each running node
//! receives the messages its neighbors sent in the previous round (sorted by sender
//! index), updates its state, and emits new messages. Message sizes are measured
//! against the CONGEST budget but never truncated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ceil_log2, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Local,
    Congest { budget_bits: u64 },
}

impl Mode {
    /// CONGEST with the default budget of `32·⌈log₂ n⌉` bits (at least 32).
    pub fn congest_default(n: usize) -> Mode {
        Mode::Congest { budget_bits: 32 * u64::from(ceil_log2(n).max(1)) }
    }

    pub fn budget_bits(&self) -> Option<u64> {
        match *self {
            Mode::Local => None,
            Mode::Congest { budget_bits } => Some(budget_bits),
        }
    }
}

/// Rounds executed and message-size statistics for one run or a whole pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "LedgerJson", try_from = "LedgerJson")]
pub struct RoundLedger {
    rounds: u64,
    max_message_bits: u64,
    violations: u64,
    mode: Mode,
}

impl RoundLedger {
    pub fn new(mode: Mode) -> Self {
        Self { rounds: 0, max_message_bits: 0, violations: 0, mode }
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn max_message_bits(&self) -> u64 {
        self.max_message_bits
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn charge_rounds(&mut self, rounds: u64) {
        self.rounds += rounds;
    }

    /// Records one (round, directed edge) transmission of `bits` bits.
    pub fn record_message(&mut self, bits: u64) {
        self.max_message_bits = self.max_message_bits.max(bits);
        if let Mode::Congest { budget_bits } = self.mode {
            if bits > budget_bits {
                self.violations += 1;
            }
        }
    }

    /// Charges one convergecast plus broadcast over Steiner trees of depth `steiner_radius`.
    ///
    /// Callers pass the maximum radius over all clusters acting in the same step. In CONGEST
    /// mode every round is stretched into a big-round of `edge_tree_multiplicity` rounds so
    /// that each tree sharing an edge gets its own slot.
    pub fn charge_cluster_op(&mut self, steiner_radius: u64, edge_tree_multiplicity: u64) {
        let base = 2 * steiner_radius + 1;
        self.rounds += match self.mode {
            Mode::Local => base,
            Mode::Congest { .. } => base * edge_tree_multiplicity.max(1),
        };
    }

    /// Folds a sub-run into this ledger: rounds add, maxima combine.
    pub fn absorb(&mut self, other: &RoundLedger) {
        self.rounds += other.rounds;
        self.max_message_bits = self.max_message_bits.max(other.max_message_bits);
        self.violations += other.violations;
    }

    /// Like [`absorb`](Self::absorb) but each sub-run round costs `stretch` rounds here.
    pub fn absorb_scaled(&mut self, other: &RoundLedger, stretch: u64) {
        self.rounds += other.rounds * stretch;
        self.max_message_bits = self.max_message_bits.max(other.max_message_bits);
        self.violations += other.violations;
    }
}

#[derive(Serialize, Deserialize)]
struct LedgerJson {
    rounds: u64,
    max_message_bits: u64,
    violations: u64,
    mode: String,
    budget_bits: Option<u64>,
}

impl From<RoundLedger> for LedgerJson {
    fn from(l: RoundLedger) -> Self {
        LedgerJson {
            rounds: l.rounds,
            max_message_bits: l.max_message_bits,
            violations: l.violations,
            mode: match l.mode {
                Mode::Local => "LOCAL".into(),
                Mode::Congest { .. } => "CONGEST".into(),
            },
            budget_bits: l.mode.budget_bits(),
        }
    }
}

impl TryFrom<LedgerJson> for RoundLedger {
    type Error = String;

    fn try_from(j: LedgerJson) -> std::result::Result<Self, String> {
        let mode = match (j.mode.as_str(), j.budget_bits) {
            ("LOCAL", _) => Mode::Local,
            ("CONGEST", Some(budget_bits)) => Mode::Congest { budget_bits },
            ("CONGEST", None) => return Err("CONGEST ledger needs budget_bits".into()),
            (other, _) => return Err(format!("unknown mode {other}")),
        };
        Ok(RoundLedger { rounds: j.rounds, max_message_bits: j.max_message_bits, violations: j.violations, mode })
    }
}

/// Size accounting for messages.
pub trait Message: Clone + Send + Sync {
    fn size_bits(&self) -> u64;
}

/// What a node knows about itself when it starts.
#[derive(Debug, Clone, Copy)]
pub struct NodeCtx<'a> {
    pub node: usize,
    pub id: u64,
    pub neighbors: &'a [usize],
}

/// Messages a node emits in one round.
#[derive(Debug)]
pub struct Outbox<M> {
    msgs: Vec<(usize, M)>,
}

impl<M: Clone> Outbox<M> {
    fn new() -> Self {
        Self { msgs: Vec::new() }
    }

    pub fn send(&mut self, to: usize, msg: M) {
        self.msgs.push((to, msg));
    }

    pub fn broadcast(&mut self, ctx: &NodeCtx<'_>, msg: M) {
        for &w in ctx.neighbors {
            self.msgs.push((w, msg.clone()));
        }
    }
}

/// Per-node behavior. Must be deterministic: the same context and inbox sequence yield the
/// same states and messages.
pub trait NodeProgram: Sync {
    type State: Send;
    type Msg: Message;

    /// Returns the initial state and whether the node halts immediately. Messages placed in
    /// `out` are delivered in round 1.
    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<Self::Msg>) -> (Self::State, bool);

    /// One round. `inbox` holds `(sender, message)` pairs sorted by sender. Returns `true`
    /// when the node halts; messages sent in the halting round are still delivered.
    fn on_round(
        &self,
        ctx: &NodeCtx<'_>,
        round: u64,
        state: &mut Self::State,
        inbox: &[(usize, Self::Msg)],
        out: &mut Outbox<Self::Msg>,
    ) -> bool;
}

#[derive(Debug)]
pub struct RunOutcome<S> {
    pub states: Vec<S>,
    pub ledger: RoundLedger,
    /// `false` when `max_rounds` was reached with some node still running.
    pub all_halted: bool,
}

/// Runs `program` on every node of `g` until all nodes halt or `max_rounds` rounds pass.
pub fn run_sync<P: NodeProgram>(g: &Graph, program: &P, mode: Mode, max_rounds: u64) -> Result<RunOutcome<P::State>> {
    if max_rounds == 0 {
        return Err(Error::InvalidParameter("max_rounds must be at least 1".into()));
    }
    let n = g.node_count();
    let ctx = |v: usize| NodeCtx { node: v, id: g.id(v), neighbors: g.neighbors(v) };
    let mut ledger = RoundLedger::new(mode);

    let started: Vec<(P::State, bool, Outbox<P::Msg>)> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut out = Outbox::new();
            let (state, halted) = program.init(&ctx(v), &mut out);
            (state, halted, out)
        })
        .collect();
    let mut states = Vec::with_capacity(n);
    let mut halted = Vec::with_capacity(n);
    let mut outboxes = Vec::with_capacity(n);
    for (s, h, o) in started {
        states.push(s);
        halted.push(h);
        outboxes.push(o);
    }

    let mut rounds = 0u64;
    loop {
        let mut inboxes = deliver(g, &mut outboxes, &mut ledger)?;
        if halted.iter().all(|&h| h) || rounds == max_rounds {
            break;
        }
        rounds += 1;
        let stepped: Vec<(bool, Outbox<P::Msg>)> = states
            .par_iter_mut()
            .zip(inboxes.par_iter_mut())
            .zip(halted.par_iter())
            .enumerate()
            .map(|(v, ((state, inbox), &was_halted))| {
                let mut out = Outbox::new();
                if was_halted {
                    return (true, out);
                }
                let h = program.on_round(&ctx(v), rounds, state, inbox, &mut out);
                (h, out)
            })
            .collect();
        for (v, (h, out)) in stepped.into_iter().enumerate() {
            halted[v] = h;
            outboxes[v] = out;
        }
    }
    ledger.charge_rounds(rounds);
    Ok(RunOutcome { states, ledger, all_halted: halted.iter().all(|&h| h) })
}

/// Moves outgoing messages into per-receiver inboxes sorted by sender, recording sizes per
/// (round, directed edge).
fn deliver<M: Message>(g: &Graph, outboxes: &mut [Outbox<M>], ledger: &mut RoundLedger) -> Result<Vec<Vec<(usize, M)>>> {
    let mut inboxes: Vec<Vec<(usize, M)>> = (0..g.node_count()).map(|_| Vec::new()).collect();
    for (from, out) in outboxes.iter_mut().enumerate() {
        let mut msgs = std::mem::take(&mut out.msgs);
        msgs.sort_by_key(|(to, _)| *to);
        let mut i = 0;
        while i < msgs.len() {
            let to = msgs[i].0;
            if !g.has_edge(from, to) {
                return Err(Error::NotANeighbor { from, to });
            }
            let mut bits = 0;
            while i < msgs.len() && msgs[i].0 == to {
                bits += msgs[i].1.size_bits();
                inboxes[to].push((from, msgs[i].1.clone()));
                i += 1;
            }
            ledger.record_message(bits);
        }
    }
    // Senders were visited in ascending order, so every inbox is already sorted by sender.
    Ok(inboxes)
}
