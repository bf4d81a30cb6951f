use std::fmt;

use crate::exact::ExactCount;
use crate::graph::NodeId;

/// Message types, in inbox processing order for the iterative phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    Echo,
    Degree,
    Leaf,
    Count,
    Reduce,
    Broadcast,
}

impl MessageKind {
    pub const ALL: [MessageKind; 6] = [
        MessageKind::Echo,
        MessageKind::Degree,
        MessageKind::Leaf,
        MessageKind::Count,
        MessageKind::Reduce,
        MessageKind::Broadcast,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Echo => "echo",
            MessageKind::Degree => "degree",
            MessageKind::Leaf => "leaf",
            MessageKind::Count => "count",
            MessageKind::Reduce => "reduce",
            MessageKind::Broadcast => "broadcast",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Echo,
    Degree(usize),
    Leaf,
    Count(ExactCount),
    Reduce,
    Broadcast { origin: NodeId, count: ExactCount },
}

/// One envelope, delivered to every neighbor of `sender`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub sender: NodeId,
    pub payload: Payload,
}

impl Message {
    pub fn new(sender: NodeId, payload: Payload) -> Self {
        Message { sender, payload }
    }

    pub fn kind(&self) -> MessageKind {
        match self.payload {
            Payload::Echo => MessageKind::Echo,
            Payload::Degree(_) => MessageKind::Degree,
            Payload::Leaf => MessageKind::Leaf,
            Payload::Count(_) => MessageKind::Count,
            Payload::Reduce => MessageKind::Reduce,
            Payload::Broadcast { .. } => MessageKind::Broadcast,
        }
    }

    /// Total inbox order: kind, then sender, then broadcast origin.
    pub fn sort_key(&self) -> (MessageKind, NodeId, NodeId) {
        let origin = match self.payload {
            Payload::Broadcast { origin, .. } => origin,
            _ => 0,
        };
        (self.kind(), self.sender, origin)
    }
}

/// Per-kind tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KindCounts(pub [u64; 6]);

impl KindCounts {
    pub fn add(&mut self, kind: MessageKind, by: u64) {
        self.0[kind.index()] += by;
    }

    pub fn get(&self, kind: MessageKind) -> u64 {
        self.0[kind.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn merge(&mut self, other: &KindCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

impl std::ops::Index<MessageKind> for KindCounts {
    type Output = u64;

    fn index(&self, kind: MessageKind) -> &u64 {
        &self.0[kind.index()]
    }
}
