//! Round-by-round records of an aggregate-and-broadcast run and their
//! newline-delimited text dump.
//!
//! Dump format, one record per `(round, node)`, tab separated, fixed order:
//!
//! ```text
//! round  node  state  e  c  n_final  emitted
//! ```
//!
//! `state`, `e`, `c` and `n_final` are the values at the start of the round;
//! `c` and `n_final` are written as `num/den`. `emitted` lists the envelopes the
//! node sent during the round as `kind:targets` pairs separated by commas
//! (`targets` is the number of neighbors reached), or `-` when it sent nothing.
//! After the last executed round one more block with `round = rounds_executed`
//! holds the final values, with `-` for `emitted`. Lines starting with `#` are
//! comments; an oracle report may be appended as `# oracle` followed by
//! `key=value` lines.

use std::fmt::Write as _;

use crate::exact::ExactCount;
use crate::graph::NodeId;
use crate::protocol::{KindCounts, Message, MessageKind, NodeCore, NodeState};

/// What a node looked like at the start of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSnapshot {
    pub state: NodeState,
    pub c: ExactCount,
    pub e: usize,
    pub effective_neighborhood: Vec<(NodeId, usize)>,
    pub n_final: ExactCount,
    pub residues: usize,
}

impl NodeSnapshot {
    pub fn of(node: &NodeCore) -> Self {
        NodeSnapshot {
            state: node.state(),
            c: node.count().clone(),
            e: node.effective_degree(),
            effective_neighborhood: node
                .effective_neighborhood()
                .iter()
                .map(|(&j, &e)| (j, e))
                .collect(),
            n_final: node.final_count(),
            residues: node.residues().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub round: u64,
    /// Start-of-round snapshot, indexed by node id.
    pub nodes: Vec<NodeSnapshot>,
    /// Messages delivered to each node this round, by kind.
    pub delivered: Vec<KindCounts>,
    /// Envelopes emitted this round, in node order.
    pub emitted: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub n: usize,
    pub degrees: Vec<usize>,
    /// What the nodes should converge to (`N`, or the sum of the values).
    pub expected_total: ExactCount,
    /// Envelopes sent during the three pre-iteration exchanges.
    pub pre_iteration: KindCounts,
    pub rounds: Vec<RoundTrace>,
    /// Values after the last executed round.
    pub final_nodes: Vec<NodeSnapshot>,
}

impl RunTrace {
    pub fn rounds_executed(&self) -> u64 {
        self.rounds.len() as u64
    }

    /// Snapshot of round `t`, with `t == rounds_executed` meaning the final state.
    pub fn snapshot(&self, t: u64) -> Option<&[NodeSnapshot]> {
        let t = t as usize;
        match t.cmp(&self.rounds.len()) {
            std::cmp::Ordering::Less => Some(&self.rounds[t].nodes),
            std::cmp::Ordering::Equal => Some(&self.final_nodes),
            std::cmp::Ordering::Greater => None,
        }
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# anb trace n={} rounds={}", self.n, self.rounds.len());
        out.push_str("# round\tnode\tstate\te\tc\tn_final\temitted\n");
        for rt in &self.rounds {
            let mut emitted: Vec<Vec<MessageKind>> = vec![Vec::new(); self.n];
            for m in &rt.emitted {
                emitted[m.sender].push(m.kind());
            }
            for (i, s) in rt.nodes.iter().enumerate() {
                let list = if emitted[i].is_empty() {
                    "-".to_string()
                } else {
                    emitted[i]
                        .iter()
                        .map(|k| format!("{}:{}", k.name(), self.degrees[i]))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                write_record(&mut out, rt.round, i, s, &list);
            }
        }
        for (i, s) in self.final_nodes.iter().enumerate() {
            write_record(&mut out, self.rounds.len() as u64, i, s, "-");
        }
        out
    }
}

fn write_record(out: &mut String, round: u64, node: NodeId, s: &NodeSnapshot, emitted: &str) {
    let _ = writeln!(
        out,
        "{round}\t{node}\t{}\t{}\t{}\t{}\t{emitted}",
        s.state,
        s.e,
        s.c.to_fraction_string(),
        s.n_final.to_fraction_string()
    );
}

/// One parsed dump record.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpRecord {
    pub round: u64,
    pub node: NodeId,
    pub state: NodeState,
    pub e: usize,
    pub c: ExactCount,
    pub n_final: ExactCount,
    pub emitted: Vec<(String, usize)>,
}

/// Parses the records of a dump, skipping comments and `key=value` lines.
pub fn parse_dump(text: &str) -> Result<Vec<DumpRecord>, String> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() || line.contains('=') {
            continue;
        }
        let bad = |what: &str| format!("line {}: bad {what}", idx + 1);
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(bad("field count"));
        }
        let emitted = if f[6] == "-" {
            Vec::new()
        } else {
            f[6].split(',')
                .map(|p| {
                    let (k, t) = p.split_once(':').ok_or_else(|| bad("emitted pair"))?;
                    Ok((k.to_string(), t.parse().map_err(|_| bad("target count"))?))
                })
                .collect::<Result<_, String>>()?
        };
        records.push(DumpRecord {
            round: f[0].parse().map_err(|_| bad("round"))?,
            node: f[1].parse().map_err(|_| bad("node"))?,
            state: f[2]
                .chars()
                .next()
                .and_then(NodeState::from_letter)
                .ok_or_else(|| bad("state"))?,
            e: f[3].parse().map_err(|_| bad("e"))?,
            c: f[4].parse().map_err(|_| bad("c"))?,
            n_final: f[5].parse().map_err(|_| bad("n_final"))?,
            emitted,
        });
    }
    Ok(records)
}
