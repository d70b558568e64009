use thiserror::Error;

/// Errors produced by graph construction, the round engine, and the algorithms built on them.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("edge ({u}, {v}) has an endpoint outside [0, {n})")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("identifier list has length {got}, expected {expected}")]
    IdLengthMismatch { got: usize, expected: usize },
    #[error("identifier {0} is used by more than one node")]
    DuplicateId(u64),
    #[error("node {0} is not in the graph")]
    NodeOutOfRange(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("node set must be non-empty")]
    EmptyNodeSet,
    #[error("node {node} has a color list of size {size}, needs at least deg+1 = {needed}")]
    ListTooSmall { node: usize, size: usize, needed: usize },
    #[error("conditional expectation disagrees with the flag cost at node {node} on a fully fixed assignment")]
    InconsistentProblem { node: usize },
    #[error("node {from} sent a message to non-neighbor {to}")]
    NotANeighbor { from: usize, to: usize },
    #[error("parse error: {0}")]
    Parse(String),
    /// An algorithm invariant that the construction guarantees was observed broken.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
