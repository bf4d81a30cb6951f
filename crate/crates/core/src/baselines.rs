//! Reference counting protocols on the same synchronous model.
//!
//! * All-to-all: every node floods its id and relays each id it learns once.
//!   A node's estimate is the number of distinct ids it knows.
//! * Single tree: every node starts a BFS query; each query builds its own
//!   spanning tree (parent = lowest-id sender of the first copy) and subtree
//!   totals flow back to the origin. A node re-reports to its parent whenever
//!   its subtree total changes, so the origin's total reaches `N` within twice
//!   its eccentricity.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ProtocolError;
use crate::graph::NodeId;

/// A node in a flooding-style baseline, driven by the engine one round at a
/// time. Each emitted message is one envelope reaching every neighbor.
pub trait RoundNode {
    type Msg: Clone;

    fn step(&mut self, inbox: &[&Self::Msg], round: u64) -> Result<Vec<Self::Msg>, ProtocolError>;
    fn sender(m: &Self::Msg) -> NodeId;
    /// Inbox order key.
    fn sort_key(m: &Self::Msg) -> (u8, NodeId, NodeId);
    fn kind_name(m: &Self::Msg) -> &'static str;
    /// Current size estimate.
    fn estimate(&self) -> u64;
    /// Ids and counters currently stored.
    fn memory_words(&self) -> u64;
    /// Node ids carried by one envelope.
    fn ids_carried(_m: &Self::Msg) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdBatch {
    pub sender: NodeId,
    pub ids: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct All2AllNode {
    id: NodeId,
    known_ids: BTreeSet<NodeId>,
}

impl All2AllNode {
    pub fn new(id: NodeId) -> Self {
        All2AllNode {
            id,
            known_ids: BTreeSet::new(),
        }
    }

    pub fn known_ids(&self) -> &BTreeSet<NodeId> {
        &self.known_ids
    }
}

impl RoundNode for All2AllNode {
    type Msg = IdBatch;

    fn step(&mut self, inbox: &[&IdBatch], round: u64) -> Result<Vec<IdBatch>, ProtocolError> {
        let mut fresh = Vec::new();
        if round == 0 {
            self.known_ids.insert(self.id);
            fresh.push(self.id);
        }
        for m in inbox {
            for &id in &m.ids {
                if self.known_ids.insert(id) {
                    fresh.push(id);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(Vec::new());
        }
        fresh.sort_unstable();
        Ok(vec![IdBatch {
            sender: self.id,
            ids: fresh,
        }])
    }

    fn sender(m: &IdBatch) -> NodeId {
        m.sender
    }

    fn sort_key(m: &IdBatch) -> (u8, NodeId, NodeId) {
        (0, m.sender, 0)
    }

    fn kind_name(_: &IdBatch) -> &'static str {
        "id"
    }

    fn ids_carried(m: &IdBatch) -> u64 {
        m.ids.len() as u64
    }

    fn estimate(&self) -> u64 {
        self.known_ids.len() as u64
    }

    fn memory_words(&self) -> u64 {
        self.known_ids.len() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeBody {
    Query {
        origin: NodeId,
    },
    Count {
        origin: NodeId,
        to: NodeId,
        total: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeMessage {
    pub sender: NodeId,
    pub body: TreeBody,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryState {
    /// `None` at the origin.
    pub parent: Option<NodeId>,
    pub child_totals: BTreeMap<NodeId, u64>,
    pub total: u64,
}

#[derive(Debug, Clone)]
pub struct SingleTreeNode {
    id: NodeId,
    queries: BTreeMap<NodeId, QueryState>,
    completed_round: Option<u64>,
}

impl SingleTreeNode {
    pub fn new(id: NodeId) -> Self {
        SingleTreeNode {
            id,
            queries: BTreeMap::new(),
            completed_round: None,
        }
    }

    pub fn query(&self, origin: NodeId) -> Option<&QueryState> {
        self.queries.get(&origin)
    }

    /// Size computed by this node's own query.
    pub fn computed_size(&self) -> u64 {
        self.queries.get(&self.id).map_or(0, |q| q.total)
    }

    /// Last round in which the node's own query total changed.
    pub fn completed_round(&self) -> Option<u64> {
        self.completed_round
    }
}

impl RoundNode for SingleTreeNode {
    type Msg = TreeMessage;

    fn step(
        &mut self,
        inbox: &[&TreeMessage],
        round: u64,
    ) -> Result<Vec<TreeMessage>, ProtocolError> {
        let id = self.id;
        let mut out = Vec::new();
        let mut dirty = BTreeSet::new();
        if round == 0 {
            self.queries.insert(
                id,
                QueryState {
                    parent: None,
                    child_totals: BTreeMap::new(),
                    total: 1,
                },
            );
            self.completed_round = Some(0);
            out.push(TreeMessage {
                sender: id,
                body: TreeBody::Query { origin: id },
            });
        }
        for m in inbox {
            match m.body {
                TreeBody::Query { origin } => {
                    if origin == id {
                        continue;
                    }
                    match self.queries.get(&origin) {
                        None => {
                            self.queries.insert(
                                origin,
                                QueryState {
                                    parent: Some(m.sender),
                                    child_totals: BTreeMap::new(),
                                    total: 1,
                                },
                            );
                            out.push(TreeMessage {
                                sender: id,
                                body: TreeBody::Query { origin },
                            });
                            out.push(TreeMessage {
                                sender: id,
                                body: TreeBody::Count {
                                    origin,
                                    to: m.sender,
                                    total: 1,
                                },
                            });
                        }
                        Some(q) if q.parent == Some(m.sender) => {
                            return Err(ProtocolError::DuplicateQuery {
                                node: id,
                                origin,
                                sender: m.sender,
                            })
                        }
                        Some(_) => {}
                    }
                }
                TreeBody::Count { origin, to, total } => {
                    if to != id {
                        continue;
                    }
                    let q = self
                        .queries
                        .get_mut(&origin)
                        .ok_or(ProtocolError::CountForUnknownQuery { node: id, origin })?;
                    q.child_totals.insert(m.sender, total);
                    dirty.insert(origin);
                }
            }
        }
        for origin in dirty {
            let q = self.queries.get_mut(&origin).expect("dirty query exists");
            let total = 1 + q.child_totals.values().sum::<u64>();
            if total == q.total {
                continue;
            }
            q.total = total;
            match q.parent {
                Some(parent) => out.push(TreeMessage {
                    sender: id,
                    body: TreeBody::Count {
                        origin,
                        to: parent,
                        total,
                    },
                }),
                None => self.completed_round = Some(round),
            }
        }
        Ok(out)
    }

    fn sender(m: &TreeMessage) -> NodeId {
        m.sender
    }

    fn sort_key(m: &TreeMessage) -> (u8, NodeId, NodeId) {
        match m.body {
            TreeBody::Query { origin } => (0, origin, m.sender),
            TreeBody::Count { origin, .. } => (1, origin, m.sender),
        }
    }

    fn kind_name(m: &TreeMessage) -> &'static str {
        match m.body {
            TreeBody::Query { .. } => "query",
            TreeBody::Count { .. } => "count",
        }
    }

    fn estimate(&self) -> u64 {
        self.computed_size()
    }

    fn memory_words(&self) -> u64 {
        self.queries
            .values()
            .map(|q| 2 + q.child_totals.len() as u64)
            .sum()
    }
}
