//! The per-node aggregate-and-broadcast state machine.
//!
//! A node starts `Active` with a local counter of 1. Active nodes absorb count
//! messages from pruned neighbors and become `Leaf` once their effective
//! degree is minimal in their neighborhood. A leaf splits its counter evenly
//! over its remaining active neighbors and goes `Inactive`, or becomes
//! `Residue` when no active neighbor is left. Residues flood `(id, count)`
//! pairs; every node sums the distinct pairs it sees into its final count.

mod message;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use message::{KindCounts, Message, MessageKind, Payload};

use crate::error::ProtocolError;
use crate::exact::{ExactCount, ExactSum};
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeState {
    Active,
    Leaf,
    Residue,
    Inactive,
}

impl NodeState {
    pub fn letter(self) -> char {
        match self {
            NodeState::Active => 'A',
            NodeState::Leaf => 'L',
            NodeState::Residue => 'R',
            NodeState::Inactive => 'I',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c {
            'A' => NodeState::Active,
            'L' => NodeState::Leaf,
            'R' => NodeState::Residue,
            'I' => NodeState::Inactive,
            _ => return None,
        })
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Full local state of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCore {
    id: NodeId,
    links: Vec<NodeId>,
    state: NodeState,
    c: ExactCount,
    e: usize,
    effective_neighborhood: BTreeMap<NodeId, usize>,
    residues: BTreeSet<NodeId>,
    /// Membership bitmap mirroring `residues`, for the duplicate check.
    residue_bits: Vec<u64>,
    n_final: ExactSum,
    neighbors: BTreeSet<NodeId>,
    broadcast_entry_round: Option<u64>,
}

impl NodeCore {
    /// Fresh node in counting mode. `links` are the node's physical neighbors;
    /// the protocol still discovers them through echo messages.
    pub fn new(id: NodeId, links: &[NodeId]) -> Result<Self, ProtocolError> {
        Self::with_value(id, links, ExactCount::one())
    }

    /// Fresh node whose local counter starts at `value`; running the protocol
    /// then sums the values over the network.
    pub fn with_value(
        id: NodeId,
        links: &[NodeId],
        value: ExactCount,
    ) -> Result<Self, ProtocolError> {
        if links.contains(&id) {
            return Err(ProtocolError::SelfNeighbor(id));
        }
        if !value.is_positive() {
            return Err(ProtocolError::NonPositiveValue {
                node: id,
                value: value.to_fraction_string(),
            });
        }
        let mut links = links.to_vec();
        links.sort_unstable();
        links.dedup();
        Ok(NodeCore {
            id,
            links,
            state: NodeState::Active,
            c: value,
            e: 0,
            effective_neighborhood: BTreeMap::new(),
            residues: BTreeSet::new(),
            residue_bits: Vec::new(),
            n_final: ExactSum::new(),
            neighbors: BTreeSet::new(),
            broadcast_entry_round: None,
        })
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn state(&self) -> NodeState {
        self.state
    }

    /// Local counter.
    pub fn count(&self) -> &ExactCount {
        &self.c
    }

    pub fn effective_degree(&self) -> usize {
        self.e
    }

    pub fn effective_neighborhood(&self) -> &BTreeMap<NodeId, usize> {
        &self.effective_neighborhood
    }

    pub fn residues(&self) -> &BTreeSet<NodeId> {
        &self.residues
    }

    /// Sum of the counts of every residue heard of so far.
    pub fn final_count(&self) -> ExactCount {
        self.n_final.value()
    }

    pub fn neighbors(&self) -> &BTreeSet<NodeId> {
        &self.neighbors
    }

    pub fn broadcast_entry_round(&self) -> Option<u64> {
        self.broadcast_entry_round
    }

    /// Running lower bound on the network total: `max(c, n_final)`.
    pub fn quorum_lower_bound(&self) -> ExactCount {
        let n_final = self.n_final.value();
        if self.c >= n_final {
            self.c.clone()
        } else {
            n_final
        }
    }

    fn msg(&self, payload: Payload) -> Message {
        Message::new(self.id, payload)
    }

    /// Announce presence.
    pub fn pre_iteration_step1(&mut self) -> Vec<Message> {
        vec![self.msg(Payload::Echo)]
    }

    /// Learn the neighborhood from echoes and announce the initial degree.
    pub fn pre_iteration_step2<'a, I>(&mut self, inbox: I) -> Result<Vec<Message>, ProtocolError>
    where
        I: IntoIterator<Item = &'a Message>,
    {
        for m in inbox {
            match m.payload {
                Payload::Echo => {
                    if self.links.binary_search(&m.sender).is_err() {
                        return Err(ProtocolError::EchoFromNonLink {
                            node: self.id,
                            sender: m.sender,
                        });
                    }
                    if !self.neighbors.insert(m.sender) {
                        return Err(ProtocolError::DuplicateEcho {
                            node: self.id,
                            sender: m.sender,
                        });
                    }
                }
                _ => return Err(self.unexpected(m)),
            }
        }
        self.e = self.neighbors.len();
        Ok(vec![self.msg(Payload::Degree(self.e))])
    }

    /// Record every neighbor's initial degree.
    pub fn pre_iteration_step3<'a, I>(&mut self, inbox: I) -> Result<(), ProtocolError>
    where
        I: IntoIterator<Item = &'a Message>,
    {
        for m in inbox {
            match m.payload {
                Payload::Degree(d) => {
                    if !self.neighbors.contains(&m.sender) {
                        return Err(ProtocolError::DegreeFromNonNeighbor {
                            node: self.id,
                            sender: m.sender,
                        });
                    }
                    if self.effective_neighborhood.insert(m.sender, d).is_some() {
                        return Err(ProtocolError::DuplicateDegree {
                            node: self.id,
                            sender: m.sender,
                        });
                    }
                }
                _ => return Err(self.unexpected(m)),
            }
        }
        Ok(())
    }

    fn unexpected(&self, m: &Message) -> ProtocolError {
        ProtocolError::Unexpected {
            node: self.id,
            sender: m.sender,
            kind: m.kind().name(),
        }
    }

    /// One iteration. `inbox` holds everything the neighbors emitted in the
    /// previous round; it is processed in the order given.
    pub fn step<'a, I>(&mut self, inbox: I, round: u64) -> Result<Vec<Message>, ProtocolError>
    where
        I: IntoIterator<Item = &'a Message>,
    {
        let inbox: Vec<&Message> = inbox.into_iter().collect();
        if let Some(m) = inbox
            .iter()
            .find(|m| matches!(m.kind(), MessageKind::Echo | MessageKind::Degree))
        {
            return Err(self.unexpected(m));
        }
        let mut out = Vec::new();
        match self.state {
            NodeState::Active => self.active_block(&inbox, &mut out)?,
            NodeState::Leaf => self.leaf_block(&inbox, &mut out)?,
            NodeState::Residue => {
                self.add_residue(self.id);
                self.n_final.add(&self.c);
                out.push(self.msg(Payload::Broadcast {
                    origin: self.id,
                    count: self.c.clone(),
                }));
                self.state = NodeState::Inactive;
                self.broadcast_entry_round = Some(round);
            }
            NodeState::Inactive => {}
        }
        for m in &inbox {
            if let Payload::Broadcast { origin, count } = &m.payload {
                if self.add_residue(*origin) {
                    self.n_final.add(count);
                    out.push(self.msg(Payload::Broadcast {
                        origin: *origin,
                        count: count.clone(),
                    }));
                    self.broadcast_entry_round.get_or_insert(round);
                }
            }
        }
        Ok(out)
    }

    fn add_residue(&mut self, id: NodeId) -> bool {
        let (word, bit) = (id / 64, 1u64 << (id % 64));
        if word >= self.residue_bits.len() {
            self.residue_bits.resize(word + 1, 0);
        }
        if self.residue_bits[word] & bit != 0 {
            return false;
        }
        self.residue_bits[word] |= bit;
        self.residues.insert(id);
        true
    }

    fn active_block(
        &mut self,
        inbox: &[&Message],
        out: &mut Vec<Message>,
    ) -> Result<(), ProtocolError> {
        let mut got_count = false;
        for m in inbox {
            match &m.payload {
                Payload::Count(v) => {
                    if self.effective_neighborhood.remove(&m.sender).is_none() {
                        return Err(ProtocolError::CountFromUnknown {
                            node: self.id,
                            sender: m.sender,
                        });
                    }
                    self.c += v;
                    self.e -= 1;
                    got_count = true;
                    out.push(self.msg(Payload::Reduce));
                }
                Payload::Reduce => {
                    let entry = self.effective_neighborhood.get_mut(&m.sender).ok_or(
                        ProtocolError::ReduceFromUnknown {
                            node: self.id,
                            sender: m.sender,
                        },
                    )?;
                    *entry = entry.checked_sub(1).ok_or(ProtocolError::ReduceUnderflow {
                        node: self.id,
                        sender: m.sender,
                    })?;
                }
                _ => {}
            }
        }
        if !got_count && self.effective_neighborhood.values().all(|&ej| self.e <= ej) {
            out.push(self.msg(Payload::Leaf));
            self.state = NodeState::Leaf;
        }
        Ok(())
    }

    fn leaf_block(
        &mut self,
        inbox: &[&Message],
        out: &mut Vec<Message>,
    ) -> Result<(), ProtocolError> {
        for m in inbox {
            if m.kind() == MessageKind::Leaf {
                self.e = self.e.checked_sub(1).ok_or(ProtocolError::LeafWhileZero {
                    node: self.id,
                    sender: m.sender,
                })?;
            }
        }
        if self.e == 0 {
            self.state = NodeState::Residue;
        } else {
            out.push(self.msg(Payload::Count(self.c.div_int(self.e))));
            self.state = NodeState::Inactive;
        }
        Ok(())
    }
}

pub fn init_node(id: NodeId, links: &[NodeId]) -> Result<NodeCore, ProtocolError> {
    NodeCore::new(id, links)
}

pub fn init_summation_node(
    id: NodeId,
    links: &[NodeId],
    value: ExactCount,
) -> Result<NodeCore, ProtocolError> {
    NodeCore::with_value(id, links, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Lock-step driver over an explicit adjacency, independent of the engine.
    struct Net {
        adj: Vec<Vec<NodeId>>,
        nodes: Vec<NodeCore>,
        outbox: Vec<Vec<Message>>,
        round: u64,
    }

    impl Net {
        fn new(adj: Vec<Vec<NodeId>>, values: Option<Vec<ExactCount>>) -> Self {
            let mut nodes: Vec<NodeCore> = adj
                .iter()
                .enumerate()
                .map(|(i, l)| match &values {
                    Some(v) => NodeCore::with_value(i, l, v[i].clone()).unwrap(),
                    None => NodeCore::new(i, l).unwrap(),
                })
                .collect();
            let echo: Vec<Vec<Message>> =
                nodes.iter_mut().map(|n| n.pre_iteration_step1()).collect();
            let mut net = Net {
                adj,
                nodes: Vec::new(),
                outbox: echo,
                round: 0,
            };
            let deg: Vec<Vec<Message>> = (0..nodes.len())
                .map(|i| nodes[i].pre_iteration_step2(&net.inbox(i)).unwrap())
                .collect();
            net.outbox = deg;
            for (i, node) in nodes.iter_mut().enumerate() {
                node.pre_iteration_step3(&net.inbox(i)).unwrap();
            }
            net.outbox = vec![Vec::new(); nodes.len()];
            net.nodes = nodes;
            net
        }

        fn inbox(&self, i: NodeId) -> Vec<Message> {
            let mut v: Vec<Message> = self.adj[i]
                .iter()
                .flat_map(|&j| self.outbox[j].iter().cloned())
                .collect();
            v.sort_by_key(|m| m.sort_key());
            v
        }

        fn step(&mut self) {
            let inboxes: Vec<Vec<Message>> = (0..self.nodes.len()).map(|i| self.inbox(i)).collect();
            let r = self.round;
            self.outbox = self
                .nodes
                .iter_mut()
                .zip(&inboxes)
                .map(|(n, inbox)| n.step(inbox, r).unwrap())
                .collect();
            self.round += 1;
        }

        fn states(&self) -> String {
            self.nodes.iter().map(|n| n.state().letter()).collect()
        }
    }

    fn k3() -> Vec<Vec<NodeId>> {
        vec![vec![1, 2], vec![0, 2], vec![0, 1]]
    }

    fn star5() -> Vec<Vec<NodeId>> {
        let mut adj = vec![vec![1, 2, 3, 4]];
        adj.extend((1..5).map(|_| vec![0]));
        adj
    }

    #[test]
    fn init_values() {
        let n = init_node(0, &[1, 2]).unwrap();
        assert_eq!(n.state(), NodeState::Active);
        assert_eq!(n.count(), &ExactCount::one());
        assert_eq!(n.effective_degree(), 0);
        assert!(n.effective_neighborhood().is_empty());
        assert!(n.final_count().is_zero());
        assert_eq!(n.quorum_lower_bound(), ExactCount::one());
        assert!(init_node(0, &[]).is_ok());
        assert_eq!(init_node(5, &[5]), Err(ProtocolError::SelfNeighbor(5)));
    }

    #[test]
    fn pre_iteration_star_and_k3() {
        let net = Net::new(star5(), None);
        let center = &net.nodes[0];
        assert_eq!(center.effective_degree(), 4);
        let expect: BTreeMap<NodeId, usize> = (1..5).map(|j| (j, 1)).collect();
        assert_eq!(center.effective_neighborhood(), &expect);

        let net = Net::new(k3(), None);
        let expect: BTreeMap<NodeId, usize> = [(1, 2), (2, 2)].into_iter().collect();
        assert_eq!(net.nodes[0].effective_neighborhood(), &expect);
        assert_eq!(net.nodes[0].effective_degree(), 2);

        let net = Net::new(vec![vec![]], None);
        assert_eq!(net.nodes[0].effective_degree(), 0);
        assert!(net.nodes[0].effective_neighborhood().is_empty());
    }

    #[test]
    fn pre_iteration_errors() {
        let mut n = init_node(0, &[1]).unwrap();
        let echo = Message::new(1, Payload::Echo);
        assert!(matches!(
            n.pre_iteration_step2([&echo, &echo]),
            Err(ProtocolError::DuplicateEcho { .. })
        ));
        let mut n = init_node(0, &[1]).unwrap();
        let stranger = Message::new(7, Payload::Echo);
        assert!(matches!(
            n.pre_iteration_step2([&stranger]),
            Err(ProtocolError::EchoFromNonLink { .. })
        ));
        let mut n = init_node(0, &[1]).unwrap();
        n.pre_iteration_step2([&echo]).unwrap();
        let deg = Message::new(7, Payload::Degree(1));
        assert!(matches!(
            n.pre_iteration_step3([&deg]),
            Err(ProtocolError::DegreeFromNonNeighbor { .. })
        ));
    }

    #[test]
    fn k3_trace() {
        let mut net = Net::new(k3(), None);
        assert_eq!(net.states(), "AAA");
        net.step(); // round 0: ties on the minimum, all leaf
        assert_eq!(net.states(), "LLL");
        assert!(net
            .outbox
            .iter()
            .all(|o| o.len() == 1 && o[0].kind() == MessageKind::Leaf));
        net.step(); // round 1: two leaf messages each, e = 0
        assert_eq!(net.states(), "RRR");
        assert!(net.outbox.iter().all(Vec::is_empty));
        net.step(); // round 2: own broadcast
        assert_eq!(net.states(), "III");
        assert!(net
            .nodes
            .iter()
            .all(|n| n.final_count() == ExactCount::one()));
        assert!(net
            .nodes
            .iter()
            .all(|n| n.broadcast_entry_round() == Some(2)));
        net.step(); // round 3: absorb the other two
        assert!(net
            .nodes
            .iter()
            .all(|n| n.final_count() == ExactCount::from(3u64)));
        assert!(net.outbox.iter().all(|o| o.len() == 2));
        net.step(); // round 4: only duplicates remain
        assert!(net.outbox.iter().all(Vec::is_empty));
    }

    #[test]
    fn star_trace() {
        let mut net = Net::new(star5(), None);
        net.step(); // 0: leaves (e = 1) go L, center waits
        assert_eq!(net.states(), "ALLLL");
        net.step(); // 1: leaves send 1/1
        assert_eq!(net.states(), "AIIII");
        for o in &net.outbox[1..] {
            assert_eq!(
                o,
                &vec![Message::new(o[0].sender, Payload::Count(ExactCount::one()))]
            );
        }
        net.step(); // 2: center absorbs four counts, one reduce each
        assert_eq!(net.nodes[0].count(), &ExactCount::from(5u64));
        assert_eq!(net.nodes[0].quorum_lower_bound(), ExactCount::from(5u64));
        assert_eq!(net.outbox[0].len(), 4);
        assert_eq!(net.states(), "AIIII");
        net.step(); // 3: empty neighborhood, vacuous minimum
        assert_eq!(net.states(), "LIIII");
        net.step(); // 4
        assert_eq!(net.states(), "RIIII");
        net.step(); // 5: center broadcasts (0, 5)
        net.step(); // 6
        assert!(net
            .nodes
            .iter()
            .all(|n| n.final_count() == ExactCount::from(5u64)));
        assert_eq!(
            net.nodes[0].residues().iter().copied().collect::<Vec<_>>(),
            vec![0]
        );
    }

    #[test]
    fn single_node() {
        let mut net = Net::new(vec![vec![]], None);
        net.step();
        assert_eq!(net.states(), "L");
        net.step();
        assert_eq!(net.states(), "R");
        net.step();
        assert_eq!(net.states(), "I");
        assert_eq!(net.nodes[0].final_count(), ExactCount::one());
    }

    #[test]
    fn k3_summation() {
        let values = [2u64, 3, 5].map(ExactCount::from).to_vec();
        let mut net = Net::new(k3(), Some(values));
        for _ in 0..6 {
            net.step();
        }
        assert!(net
            .nodes
            .iter()
            .all(|n| n.final_count() == ExactCount::from(10u64)));
    }

    #[test]
    fn summation_rejects_non_positive() {
        assert!(matches!(
            init_summation_node(0, &[], ExactCount::zero()),
            Err(ProtocolError::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn path3_splits_counts() {
        // 0 - 1 - 2: the ends leaf first, the middle collects 3.
        let mut net = Net::new(vec![vec![1], vec![0, 2], vec![1]], None);
        for _ in 0..12 {
            net.step();
        }
        assert!(net
            .nodes
            .iter()
            .all(|n| n.final_count() == ExactCount::from(3u64)));
        assert_eq!(net.nodes[1].residues().len(), 1);
    }

    #[test]
    fn protocol_violations() {
        let mut net = Net::new(k3(), None);
        let bogus = Message::new(9, Payload::Count(ExactCount::one()));
        assert!(matches!(
            net.nodes[0].step([&bogus], 0),
            Err(ProtocolError::CountFromUnknown { sender: 9, .. })
        ));

        let mut leaf = net.nodes[1].clone();
        leaf.step(std::iter::empty(), 0).unwrap();
        assert_eq!(leaf.state(), NodeState::Leaf);
        let l = Message::new(0, Payload::Leaf);
        assert!(matches!(
            leaf.step([&l, &l, &l], 1),
            Err(ProtocolError::LeafWhileZero { .. })
        ));

        let echo = Message::new(1, Payload::Echo);
        assert!(matches!(
            net.nodes[2].step([&echo], 0),
            Err(ProtocolError::Unexpected { kind: "echo", .. })
        ));
    }

    #[test]
    fn inactive_ignores_all_but_broadcast() {
        let mut net = Net::new(k3(), None);
        for _ in 0..4 {
            net.step();
        }
        let mut n = net.nodes[0].clone();
        let before = n.clone();
        let c = Message::new(1, Payload::Count(ExactCount::one()));
        let r = Message::new(1, Payload::Reduce);
        let l = Message::new(1, Payload::Leaf);
        assert!(n.step([&l, &c, &r], 9).unwrap().is_empty());
        assert_eq!(n, before);
        let dup = Message::new(
            1,
            Payload::Broadcast {
                origin: 2,
                count: ExactCount::one(),
            },
        );
        assert!(n.step([&dup], 10).unwrap().is_empty());
        let fresh = Message::new(
            1,
            Payload::Broadcast {
                origin: 42,
                count: ExactCount::one(),
            },
        );
        let out = n.step([&fresh, &fresh], 11).unwrap();
        assert_eq!(out.len(), 1, "a given origin is relayed at most once");
        assert_eq!(n.final_count(), ExactCount::from(4u64));
    }
}
