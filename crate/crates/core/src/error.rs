use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;
use crate::oracle::OracleReport;

/// Errors raised while building or loading a graph.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter {
        family: &'static str,
        reason: String,
    },
    #[error("node id {id} out of range for a graph of {n} nodes")]
    NodeOutOfRange { id: NodeId, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("graph is disconnected: component {component:?} is unreachable from node 0")]
    Disconnected { component: Vec<NodeId> },
    #[error("no connected draw after {attempts} attempts")]
    ConnectivityBudget { attempts: u32 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// A node observed a message sequence that Algorithm-conformant peers can
/// never produce.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("node {0} lists itself as a neighbor")]
    SelfNeighbor(NodeId),
    #[error("node {node}: echo from {sender}, which is not a link")]
    EchoFromNonLink { node: NodeId, sender: NodeId },
    #[error("node {node}: duplicate echo from {sender}")]
    DuplicateEcho { node: NodeId, sender: NodeId },
    #[error("node {node}: degree message from non-neighbor {sender}")]
    DegreeFromNonNeighbor { node: NodeId, sender: NodeId },
    #[error("node {node}: duplicate degree message from {sender}")]
    DuplicateDegree { node: NodeId, sender: NodeId },
    #[error("node {node}: count message from {sender}, absent from the effective neighborhood")]
    CountFromUnknown { node: NodeId, sender: NodeId },
    #[error("node {node}: reduce message from {sender}, absent from the effective neighborhood")]
    ReduceFromUnknown { node: NodeId, sender: NodeId },
    #[error("node {node}: reduce from {sender} would make its effective degree negative")]
    ReduceUnderflow { node: NodeId, sender: NodeId },
    #[error("node {node}: leaf message from {sender} with effective degree already 0")]
    LeafWhileZero { node: NodeId, sender: NodeId },
    #[error("node {node}: unexpected {kind} message from {sender} during the iterative phase")]
    Unexpected {
        node: NodeId,
        sender: NodeId,
        kind: &'static str,
    },
    #[error("node {node}: non-positive initial value {value}")]
    NonPositiveValue { node: NodeId, value: String },
    #[error("node {node}: query {origin} delivered twice by parent {sender}")]
    DuplicateQuery {
        node: NodeId,
        origin: NodeId,
        sender: NodeId,
    },
    #[error("node {node}: count for query {origin} it never joined")]
    CountForUnknownQuery { node: NodeId, origin: NodeId },
}

/// Errors from the simulation engine.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("n_max ({n_max}) is smaller than the graph size ({n})")]
    NMaxTooSmall { n_max: usize, n: usize },
    #[error("summation mode needs one value per node: got {got}, graph has {n}")]
    ValueCount { got: usize, n: usize },
    #[error("round {round}, node {node}: {source}")]
    Protocol {
        round: i64,
        node: NodeId,
        #[source]
        source: ProtocolError,
    },
    #[error("oracle requires trace_level=full")]
    TraceRequired,
    #[error("oracle applies to the aggregate-and-broadcast algorithm only")]
    OracleAlgorithm,
    #[error("invariant check failed: {}", .0.first_failure().map(|f| f.to_string()).unwrap_or_default())]
    Oracle(Box<OracleReport>),
}

/// Errors from the metrics module.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("residue count {r} exceeds network size {n}")]
    ResidueExceedsSize { r: u64, n: u64 },
    #[error("network size must be positive")]
    ZeroSize,
    #[error("trace incomplete: {0}")]
    IncompleteTrace(&'static str),
}
