//! Synchronous simulator for aggregate-and-broadcast node counting.
//!
//! Nodes of an undirected connected graph run in lock-step rounds. Each round
//! every node reads what its neighbors sent in the previous round, updates its
//! state and emits envelopes that reach all of its neighbors. The crate
//! provides the aggregate-and-broadcast protocol, two reference protocols
//! (all-to-all flooding and per-node spanning trees), graph generators,
//! metrics, and an invariant checker for full traces.
//!
//! ```
//! use anb_core::{engine, graph};
//!
//! let g = graph::generate(&graph::GraphFamily::Star, 5, 0).unwrap();
//! let result = engine::run(&engine::SimConfig::new(g, engine::Algorithm::Anb)).unwrap();
//! assert!(result.correct());
//! assert_eq!(result.final_counts[0].to_u64(), Some(5));
//! ```

pub mod baselines;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod exact;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod protocol;
pub mod rng;
pub mod sweep;
pub mod trace;

pub use engine::{
    run, run_with_oracle, Algorithm, FaultInjection, Mode, RunResult, SimConfig, TraceLevel,
};
pub use error::{GraphError, MetricsError, ProtocolError, SimError};
pub use exact::ExactCount;
pub use graph::{Graph, GraphFamily, NodeId};
pub use metrics::RunMetrics;
pub use oracle::OracleReport;
