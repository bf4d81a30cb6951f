//! Invariant checks over a full aggregate-and-broadcast trace.
//!
//! A round `t` is a resting time when no count message is delivered in it and
//! no node starts it as a leaf. The checks below are evaluated at resting
//! times `T_0 = 0 < T_1 < ...` and over the whole run.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use num_rational::Rational64;

use crate::exact::ExactCount;
use crate::graph::{Graph, NodeId};
use crate::protocol::{MessageKind, NodeState};
use crate::trace::{NodeSnapshot, RunTrace};

pub const CHECKS: [&str; 9] = [
    "initial_resting",
    "conservation",
    "resting_spacing",
    "reduction_bound",
    "convergence_bound",
    "active_decrease",
    "residue_timing",
    "effective_degree",
    "state_transitions",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub check: &'static str,
    pub round: Option<u64>,
    pub node: Option<NodeId>,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.check)?;
        if let Some(t) = self.round {
            write!(f, " at round {t}")?;
        }
        if let Some(i) = self.node {
            write!(f, " node {i}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub failure: Option<Failure>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Nodes by phase at a resting time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePartition {
    pub round: u64,
    pub active: Vec<NodeId>,
    /// Nodes that have been residues at or before this round.
    pub residues: Vec<NodeId>,
    pub inactive: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub n: usize,
    pub resting_times: Vec<u64>,
    pub partitions: Vec<PhasePartition>,
    pub checks: Vec<CheckResult>,
    /// First round starting with no active node.
    pub t_active_zero: Option<u64>,
    /// First round starting with no active or leaf node.
    pub t_reduction: Option<u64>,
    pub t_converged: Option<u64>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.checks.iter().find_map(|c| c.failure.as_ref())
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `t_active_zero <= 3N`, the tighter form of the reduction bound.
    pub fn active_zero_within_3n(&self) -> bool {
        self.t_active_zero.is_some_and(|t| t <= 3 * self.n as u64)
    }

    /// Observed reduction time over `N`.
    pub fn reduction_tightness(&self) -> Option<Rational64> {
        self.t_reduction
            .map(|t| Rational64::new(t as i64, self.n as i64))
    }

    /// Observed convergence time over `N`.
    pub fn convergence_tightness(&self) -> Option<Rational64> {
        self.t_converged
            .map(|t| Rational64::new(t as i64, self.n as i64))
    }

    pub fn to_key_values(&self) -> String {
        let opt = |v: Option<u64>| v.map_or("-".to_string(), |v| v.to_string());
        let mut out = String::new();
        let _ = writeln!(out, "passed={}", self.passed());
        let _ = writeln!(out, "n={}", self.n);
        let times: Vec<String> = self.resting_times.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "resting_times={}", times.join(","));
        let _ = writeln!(out, "t_active_zero={}", opt(self.t_active_zero));
        let _ = writeln!(
            out,
            "active_zero_within_3n={}",
            self.active_zero_within_3n()
        );
        let _ = writeln!(out, "t_reduction={}", opt(self.t_reduction));
        let _ = writeln!(out, "t_converged={}", opt(self.t_converged));
        for c in &self.checks {
            let v = match &c.failure {
                None => "pass".to_string(),
                Some(f) => format!("fail:{f}"),
            };
            let _ = writeln!(out, "check.{}={v}", c.name);
        }
        out
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "oracle: {} ({} resting times)",
            if self.passed() {
                "all checks passed"
            } else {
                "FAILED"
            },
            self.resting_times.len()
        )?;
        for c in &self.checks {
            match &c.failure {
                None => writeln!(f, "  ok    {}", c.name)?,
                Some(fl) => writeln!(f, "  FAIL  {fl}")?,
            }
        }
        write!(
            f,
            "  t_active_zero={:?} t_reduction={:?} t_converged={:?} (N={})",
            self.t_active_zero, self.t_reduction, self.t_converged, self.n
        )
    }
}

fn count_delivered(trace: &RunTrace, t: usize) -> u64 {
    trace.rounds[t]
        .delivered
        .iter()
        .map(|k| k.get(MessageKind::Count))
        .sum()
}

fn count_state(nodes: &[NodeSnapshot], s: NodeState) -> usize {
    nodes.iter().filter(|v| v.state == s).count()
}

/// Rounds in which no count message is delivered and no node is a leaf.
pub fn detect_resting_times(trace: &RunTrace) -> Vec<u64> {
    (0..trace.rounds.len())
        .filter(|&t| {
            count_delivered(trace, t) == 0
                && count_state(&trace.rounds[t].nodes, NodeState::Leaf) == 0
        })
        .map(|t| t as u64)
        .collect()
}

fn fail(
    check: &'static str,
    round: Option<u64>,
    node: Option<NodeId>,
    detail: String,
) -> Option<Failure> {
    Some(Failure {
        check,
        round,
        node,
        detail,
    })
}

/// Runs every check.
pub fn check(trace: &RunTrace, graph: &Graph) -> OracleReport {
    let resting = detect_resting_times(trace);
    let n = trace.n;

    let mut ever_residue = vec![None::<u64>; n];
    for rt in &trace.rounds {
        for (i, v) in rt.nodes.iter().enumerate() {
            if v.state == NodeState::Residue && ever_residue[i].is_none() {
                ever_residue[i] = Some(rt.round);
            }
        }
    }
    let partitions: Vec<PhasePartition> = resting
        .iter()
        .map(|&t| {
            let nodes = &trace.rounds[t as usize].nodes;
            let mut p = PhasePartition {
                round: t,
                active: Vec::new(),
                residues: Vec::new(),
                inactive: Vec::new(),
            };
            for (i, v) in nodes.iter().enumerate() {
                if v.state == NodeState::Active {
                    p.active.push(i);
                } else if ever_residue[i].is_some_and(|r| r <= t) {
                    p.residues.push(i);
                } else {
                    p.inactive.push(i);
                }
            }
            p
        })
        .collect();

    let mut t_active_zero = None;
    let mut t_reduction = None;
    for t in 0..=trace.rounds.len() as u64 {
        let nodes = trace.snapshot(t).expect("in range");
        let a = count_state(nodes, NodeState::Active);
        let l = count_state(nodes, NodeState::Leaf);
        if a == 0 && t_active_zero.is_none() {
            t_active_zero = Some(t);
        }
        if a + l == 0 && t_reduction.is_none() {
            t_reduction = Some(t);
        }
    }
    let mut t_converged = None;
    for t in 0..trace.rounds.len() as u64 {
        let now = trace.snapshot(t).expect("in range");
        let next = trace.snapshot(t + 1).expect("in range");
        if now.iter().zip(next).any(|(a, b)| a.n_final != b.n_final) {
            t_converged = Some(t);
        }
    }

    let checks = vec![
        CheckResult {
            name: "initial_resting",
            failure: if resting.first() == Some(&0) {
                None
            } else {
                fail(
                    "initial_resting",
                    Some(0),
                    None,
                    "round 0 is not a resting time".into(),
                )
            },
        },
        CheckResult {
            name: "conservation",
            failure: check_conservation(trace, &partitions),
        },
        CheckResult {
            name: "resting_spacing",
            failure: check_spacing(trace, &partitions),
        },
        CheckResult {
            name: "reduction_bound",
            failure: match t_reduction {
                Some(t) if t <= 3 * n as u64 + 2 => None,
                Some(t) => fail(
                    "reduction_bound",
                    Some(t),
                    None,
                    format!(
                        "active and leaf nodes remain until round {t} > 3N+2 = {}",
                        3 * n + 2
                    ),
                ),
                None => fail(
                    "reduction_bound",
                    None,
                    None,
                    "active or leaf nodes never vanish".into(),
                ),
            },
        },
        CheckResult {
            name: "convergence_bound",
            failure: check_convergence(trace, t_converged),
        },
        CheckResult {
            name: "active_decrease",
            failure: check_active_decrease(&partitions),
        },
        CheckResult {
            name: "residue_timing",
            failure: check_residue_timing(trace, &resting),
        },
        CheckResult {
            name: "effective_degree",
            failure: check_effective_degree(trace, graph, &resting),
        },
        CheckResult {
            name: "state_transitions",
            failure: check_transitions(trace),
        },
    ];

    OracleReport {
        n,
        resting_times: resting,
        partitions,
        checks,
        t_active_zero,
        t_reduction,
        t_converged,
    }
}

/// Mass held by active nodes and residues equals the network total at every
/// resting time. A violation is pinned to the lowest node whose counter
/// changed since the previous resting time, which is where extra mass entered.
pub fn check_conservation(trace: &RunTrace, partitions: &[PhasePartition]) -> Option<Failure> {
    let mut prev: Option<&[NodeSnapshot]> = None;
    for p in partitions {
        let nodes = &trace.rounds[p.round as usize].nodes;
        let total: ExactCount = p
            .active
            .iter()
            .chain(&p.residues)
            .map(|&i| &nodes[i].c)
            .sum();
        if total != trace.expected_total {
            let node = prev.and_then(|before| {
                p.active
                    .iter()
                    .chain(&p.residues)
                    .copied()
                    .find(|&i| before[i].c != nodes[i].c)
            });
            return fail(
                "conservation",
                Some(p.round),
                node,
                format!(
                    "active and residue mass {total}, expected {}",
                    trace.expected_total
                ),
            );
        }
        prev = Some(nodes);
    }
    None
}

fn check_spacing(trace: &RunTrace, partitions: &[PhasePartition]) -> Option<Failure> {
    let last = trace.rounds.len() as u64;
    for (k, p) in partitions.iter().enumerate() {
        if p.active.is_empty() {
            continue;
        }
        match partitions.get(k + 1) {
            Some(q) if q.round - p.round <= 3 => {}
            Some(q) => {
                return fail(
                    "resting_spacing",
                    Some(p.round),
                    None,
                    format!(
                        "next resting time is {} ({} rounds later)",
                        q.round,
                        q.round - p.round
                    ),
                )
            }
            None if last > p.round + 3 => {
                return fail(
                    "resting_spacing",
                    Some(p.round),
                    None,
                    "no later resting time while active nodes remain".into(),
                )
            }
            None => {}
        }
    }
    None
}

fn check_convergence(trace: &RunTrace, t_converged: Option<u64>) -> Option<Failure> {
    let n = trace.n as u64;
    if let Some((i, v)) = trace
        .final_nodes
        .iter()
        .enumerate()
        .find(|(_, v)| v.n_final != trace.expected_total)
    {
        return fail(
            "convergence_bound",
            None,
            Some(i),
            format!(
                "final value {} differs from {}",
                v.n_final, trace.expected_total
            ),
        );
    }
    match t_converged {
        Some(t) if t <= 4 * n => None,
        Some(t) => fail(
            "convergence_bound",
            Some(t),
            None,
            format!("last change in round {t} > 4N = {}", 4 * n),
        ),
        None => fail(
            "convergence_bound",
            None,
            None,
            "no value ever changed".into(),
        ),
    }
}

fn check_active_decrease(partitions: &[PhasePartition]) -> Option<Failure> {
    for w in partitions.windows(2) {
        let (a, b) = (w[0].active.len(), w[1].active.len());
        let ok = if a > 0 { b < a } else { b == 0 };
        if !ok {
            return fail(
                "active_decrease",
                Some(w[1].round),
                None,
                format!("active count went from {a} to {b}"),
            );
        }
    }
    None
}

fn check_residue_timing(trace: &RunTrace, resting: &[u64]) -> Option<Failure> {
    for rt in &trace.rounds {
        for (i, v) in rt.nodes.iter().enumerate() {
            if v.state != NodeState::Residue {
                continue;
            }
            let ok = rt.round >= 2
                && resting.binary_search(&(rt.round - 2)).is_ok()
                && count_state(
                    &trace.rounds[rt.round as usize - 2].nodes,
                    NodeState::Active,
                ) > 0;
            if !ok {
                return fail(
                    "residue_timing",
                    Some(rt.round),
                    Some(i),
                    "residue not two rounds after a resting time with active nodes".into(),
                );
            }
        }
    }
    None
}

/// At resting times every active node's effective degree and neighborhood
/// table match the active subgraph.
pub fn check_effective_degree(trace: &RunTrace, graph: &Graph, resting: &[u64]) -> Option<Failure> {
    for &t in resting {
        let nodes = &trace.rounds[t as usize].nodes;
        let active = |j: NodeId| nodes[j].state == NodeState::Active;
        let active_degree = |j: NodeId| graph.neighbors(j).iter().filter(|&&k| active(k)).count();
        // Reduces sent in the previous round are delivered during round t, so
        // the start-of-round tables still include them.
        let mut pending = vec![0usize; trace.n];
        if t > 0 {
            for m in &trace.rounds[t as usize - 1].emitted {
                if m.kind() == MessageKind::Reduce {
                    pending[m.sender] += 1;
                }
            }
        }
        for (i, v) in nodes.iter().enumerate() {
            if v.state != NodeState::Active {
                continue;
            }
            let expected: BTreeSet<NodeId> = graph
                .neighbors(i)
                .iter()
                .copied()
                .filter(|&j| active(j))
                .collect();
            let keys: BTreeSet<NodeId> = v.effective_neighborhood.iter().map(|&(j, _)| j).collect();
            let detail = if v.e != expected.len() {
                Some(format!(
                    "e = {}, active neighbors = {}",
                    v.e,
                    expected.len()
                ))
            } else if keys != expected {
                Some(format!(
                    "neighborhood table {keys:?}, active neighbors {expected:?}"
                ))
            } else {
                v.effective_neighborhood
                    .iter()
                    .find(|&&(j, ej)| ej.checked_sub(pending[j]) != Some(active_degree(j)))
                    .map(|&(j, ej)| {
                        format!(
                            "stored degree of {j} is {ej} with {} reduces pending, actual {}",
                            pending[j],
                            active_degree(j)
                        )
                    })
            };
            if let Some(d) = detail {
                return fail("effective_degree", Some(t), Some(i), d);
            }
        }
    }
    None
}

/// Each node follows `A* L R? I*`; a complete trace has exactly one `L`.
fn check_transitions(trace: &RunTrace) -> Option<Failure> {
    use NodeState::*;
    let complete = trace.final_nodes.iter().all(|v| v.state == Inactive);
    for i in 0..trace.n {
        let mut prev = Active;
        let mut leaves = 0;
        for t in 0..=trace.rounds.len() as u64 {
            let s = trace.snapshot(t).expect("in range")[i].state;
            if t == 0 && s != Active {
                return fail(
                    "state_transitions",
                    Some(0),
                    Some(i),
                    format!("starts in {s}"),
                );
            }
            let legal = matches!(
                (prev, s),
                (Active, Active | Leaf)
                    | (Leaf, Residue | Inactive)
                    | (Residue, Inactive)
                    | (Inactive, Inactive)
            ) || t == 0;
            if !legal {
                return fail(
                    "state_transitions",
                    Some(t),
                    Some(i),
                    format!("{prev} -> {s}"),
                );
            }
            if s == Leaf {
                leaves += 1;
            }
            prev = s;
        }
        if complete && leaves != 1 {
            return fail(
                "state_transitions",
                None,
                Some(i),
                format!("leaf state held {leaves} times"),
            );
        }
    }
    None
}
