//! Lock-step round driver.
//!
//! Messages emitted in round `t` are delivered at the start of round `t + 1`.
//! Every inbox is sorted (message kind, then sender, then broadcast origin)
//! before a node sees it, so runs are bit-for-bit reproducible. The three
//! pre-iteration exchanges of aggregate-and-broadcast run before round 0 and
//! do not count against the round budget of `4 * n_max + 1`.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{All2AllNode, RoundNode, SingleTreeNode};
use crate::error::{ProtocolError, SimError};
use crate::exact::ExactCount;
use crate::graph::{Graph, NodeId};
use crate::metrics::{self, AnbTallies, RunMetrics};
use crate::oracle::{self, OracleReport};
use crate::protocol::{KindCounts, Message, NodeCore, NodeState, Payload};
use crate::trace::{NodeSnapshot, RoundTrace, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Anb,
    All2All,
    SingleTree,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Anb, Algorithm::All2All, Algorithm::SingleTree];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Anb => "anb",
            Algorithm::All2All => "all2all",
            Algorithm::SingleTree => "st",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected anb, all2all or st)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Mode {
    /// Every node starts with 1; the result is `N`.
    #[default]
    Count,
    /// Node `i` starts with `values[i]`; the result is their sum.
    Sum(Vec<ExactCount>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    None,
    #[default]
    Metrics,
    Full,
}

/// Deliberate corruption, for exercising the invariant checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultInjection {
    /// Every count message carries twice the intended value.
    DoubleCountPayloads,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Graph,
    pub algorithm: Algorithm,
    /// Upper bound on the network size known to every node; sets the budget.
    pub n_max: usize,
    pub mode: Mode,
    pub trace_level: TraceLevel,
    /// Stop once every node is inactive and nothing is in flight.
    pub early_stop: bool,
    pub fault: Option<FaultInjection>,
}

impl SimConfig {
    pub fn new(graph: Graph, algorithm: Algorithm) -> Self {
        let n_max = graph.n();
        SimConfig {
            graph,
            algorithm,
            n_max,
            mode: Mode::Count,
            trace_level: TraceLevel::Metrics,
            early_stop: true,
            fault: None,
        }
    }

    pub fn with_trace(mut self, level: TraceLevel) -> Self {
        self.trace_level = level;
        self
    }

    pub fn t_max(&self) -> u64 {
        4 * self.n_max as u64 + 1
    }

    fn expected_total(&self) -> ExactCount {
        match &self.mode {
            Mode::Count => ExactCount::from(self.graph.n() as u64),
            Mode::Sum(values) => values.iter().sum(),
        }
    }
}

/// Baseline-specific outcomes.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineDetail {
    All2All {
        /// `estimates[t][i]`: ids known by node `i` after round `t`; only with a
        /// full trace.
        estimates: Option<Vec<Vec<u64>>>,
    },
    SingleTree {
        /// Last round in which each origin's own total changed.
        completion_rounds: Vec<u64>,
        /// `parents[origin][i]`: parent of `i` in the tree of `origin`.
        parents: Vec<Vec<Option<NodeId>>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub final_counts: Vec<ExactCount>,
    pub rounds_executed: u64,
    /// First round whose start has no active or leaf node.
    pub t_reduction: Option<u64>,
    /// Last round in which any node's result changed.
    pub t_converged: Option<u64>,
    pub residue_ids: Vec<NodeId>,
    pub metrics: RunMetrics,
    pub trace: Option<RunTrace>,
    pub baseline: Option<BaselineDetail>,
}

impl RunResult {
    pub fn correct(&self) -> bool {
        self.metrics.correct
    }
}

pub fn run(config: &SimConfig) -> Result<RunResult, SimError> {
    let n = config.graph.n();
    if config.n_max < n {
        return Err(SimError::NMaxTooSmall {
            n_max: config.n_max,
            n,
        });
    }
    if let Mode::Sum(values) = &config.mode {
        if values.len() != n {
            return Err(SimError::ValueCount {
                got: values.len(),
                n,
            });
        }
    }
    match config.algorithm {
        Algorithm::Anb => run_anb(config),
        Algorithm::All2All => {
            let nodes = (0..n).map(All2AllNode::new).collect();
            run_baseline(config, nodes)
        }
        Algorithm::SingleTree => {
            let nodes = (0..n).map(SingleTreeNode::new).collect();
            run_baseline(config, nodes)
        }
    }
}

/// Runs with a full trace and checks every invariant on it. A failed check
/// comes back as [`SimError::Oracle`].
pub fn run_with_oracle(config: &SimConfig) -> Result<(RunResult, OracleReport), SimError> {
    if config.algorithm != Algorithm::Anb {
        return Err(SimError::OracleAlgorithm);
    }
    if config.trace_level != TraceLevel::Full {
        return Err(SimError::TraceRequired);
    }
    let result = run(config)?;
    let trace = result.trace.as_ref().expect("full trace requested");
    let report = oracle::check(trace, &config.graph);
    if report.passed() {
        Ok((result, report))
    } else {
        Err(SimError::Oracle(Box::new(report)))
    }
}

fn protocol_err(round: i64, node: NodeId) -> impl FnOnce(ProtocolError) -> SimError {
    move |source| SimError::Protocol {
        round,
        node,
        source,
    }
}

fn gather<'a, M, K: Ord>(
    g: &Graph,
    outboxes: &'a [Vec<M>],
    i: NodeId,
    key: impl Fn(&M) -> K,
) -> Vec<&'a M> {
    let mut inbox: Vec<&M> = g
        .neighbors(i)
        .iter()
        .flat_map(|&j| outboxes[j].iter())
        .collect();
    inbox.sort_by_key(|m| key(m));
    inbox
}

/// Outboxes sorted by kind and origin, with the start of each kind's run.
struct Outboxes {
    messages: Vec<Vec<Message>>,
    bounds: Vec<[u32; 7]>,
}

impl Outboxes {
    fn new(n: usize) -> Self {
        Outboxes {
            messages: vec![Vec::new(); n],
            bounds: vec![[0; 7]; n],
        }
    }

    fn set(&mut self, i: NodeId, mut out: Vec<Message>) {
        out.sort_by_key(Message::sort_key);
        let mut b = [0u32; 7];
        for m in &out {
            b[m.kind().index() + 1] += 1;
        }
        for k in 1..7 {
            b[k] += b[k - 1];
        }
        self.bounds[i] = b;
        self.messages[i] = out;
    }

    fn is_empty(&self) -> bool {
        self.messages.iter().all(Vec::is_empty)
    }

    /// The inbox of `i` in (kind, sender, origin) order, by merging the
    /// neighbors' runs; adjacency lists are sorted, so no comparison is needed.
    fn inbox(&self, g: &Graph, i: NodeId) -> Vec<&Message> {
        let senders: Vec<NodeId> = g
            .neighbors(i)
            .iter()
            .copied()
            .filter(|&j| !self.messages[j].is_empty())
            .collect();
        let total = senders.iter().map(|&j| self.messages[j].len()).sum();
        let mut inbox = Vec::with_capacity(total);
        for k in 0..6 {
            for &j in &senders {
                let b = &self.bounds[j];
                inbox.extend(&self.messages[j][b[k] as usize..b[k + 1] as usize]);
            }
        }
        inbox
    }
}

fn run_anb(config: &SimConfig) -> Result<RunResult, SimError> {
    let g = &config.graph;
    let n = g.n();
    let full = config.trace_level == TraceLevel::Full;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let node = match &config.mode {
            Mode::Count => NodeCore::new(i, g.neighbors(i)),
            Mode::Sum(values) => NodeCore::with_value(i, g.neighbors(i), values[i].clone()),
        };
        nodes.push(node.map_err(protocol_err(-3, i))?);
    }

    let mut envelopes = KindCounts::default();
    let echoes: Vec<Vec<Message>> = nodes.iter_mut().map(|v| v.pre_iteration_step1()).collect();
    let mut degrees = Vec::with_capacity(n);
    for (i, v) in nodes.iter_mut().enumerate() {
        let inbox = gather(g, &echoes, i, Message::sort_key);
        degrees.push(v.pre_iteration_step2(inbox).map_err(protocol_err(-2, i))?);
    }
    for (i, v) in nodes.iter_mut().enumerate() {
        let inbox = gather(g, &degrees, i, Message::sort_key);
        v.pre_iteration_step3(inbox).map_err(protocol_err(-1, i))?;
    }
    for m in echoes.iter().chain(&degrees).flatten() {
        envelopes.add(m.kind(), 1);
    }
    let pre_iteration = envelopes;

    let mut outboxes = Outboxes::new(n);
    let mut was_residue = vec![false; n];
    let mut t_reduction = None;
    let mut last_change = None;
    let mut rounds = Vec::new();
    let mut rounds_executed = 0;
    for t in 0..config.t_max() {
        let mut busy = false;
        for (i, v) in nodes.iter().enumerate() {
            match v.state() {
                NodeState::Active | NodeState::Leaf => busy = true,
                NodeState::Residue => was_residue[i] = true,
                NodeState::Inactive => {}
            }
        }
        if !busy && t_reduction.is_none() {
            t_reduction = Some(t);
        }
        let snapshot: Option<Vec<NodeSnapshot>> =
            full.then(|| nodes.iter().map(NodeSnapshot::of).collect());
        let mut delivered = Vec::new();
        let mut next = Outboxes::new(n);
        let mut changed = false;
        for (i, v) in nodes.iter_mut().enumerate() {
            let inbox = outboxes.inbox(g, i);
            if full {
                let mut kc = KindCounts::default();
                for m in &inbox {
                    kc.add(m.kind(), 1);
                }
                delivered.push(kc);
            }
            let mut out = v.step(inbox, t).map_err(protocol_err(t as i64, i))?;
            for m in &mut out {
                envelopes.add(m.kind(), 1);
                match &mut m.payload {
                    Payload::Broadcast { .. } => changed = true,
                    Payload::Count(c)
                        if config.fault == Some(FaultInjection::DoubleCountPayloads) =>
                    {
                        *c = c.mul_int(2);
                    }
                    _ => {}
                }
            }
            next.set(i, out);
        }
        outboxes = next;
        if changed {
            last_change = Some(t);
        }
        if let Some(nodes) = snapshot {
            rounds.push(RoundTrace {
                round: t,
                nodes,
                delivered,
                emitted: outboxes.messages.iter().flatten().cloned().collect(),
            });
        }
        rounds_executed = t + 1;
        if config.early_stop
            && outboxes.is_empty()
            && nodes.iter().all(|v| v.state() == NodeState::Inactive)
        {
            break;
        }
    }
    if t_reduction.is_none()
        && nodes
            .iter()
            .all(|v| matches!(v.state(), NodeState::Residue | NodeState::Inactive))
    {
        t_reduction = Some(rounds_executed);
    }
    for (i, v) in nodes.iter().enumerate() {
        if v.state() == NodeState::Residue {
            was_residue[i] = true;
        }
    }

    let expected = config.expected_total();
    let final_counts: Vec<ExactCount> = nodes.iter().map(|v| v.final_count()).collect();
    let agree = final_counts.windows(2).all(|w| w[0] == w[1]);
    let correct = final_counts.iter().all(|c| c == &expected);
    let t_converged = if agree { last_change } else { None };
    let degrees_vec: Vec<usize> = g.degrees().collect();
    let residue_ids: Vec<NodeId> = (0..n).filter(|&i| was_residue[i]).collect();
    let metrics = metrics::anb_metrics(AnbTallies {
        n,
        degrees: &degrees_vec,
        envelopes,
        t_reduction,
        t_converged,
        residue_count: residue_ids.len() as u64,
        residues_known: nodes.iter().map(|v| v.residues().len()).collect(),
        correct,
    });
    let trace = full.then(|| RunTrace {
        n,
        degrees: degrees_vec,
        expected_total: expected,
        pre_iteration,
        rounds,
        final_nodes: nodes.iter().map(NodeSnapshot::of).collect(),
    });
    Ok(RunResult {
        algorithm: Algorithm::Anb,
        final_counts,
        rounds_executed,
        t_reduction,
        t_converged,
        residue_ids,
        metrics,
        trace,
        baseline: None,
    })
}

trait Detail: RoundNode + Sized {
    const ALGORITHM: Algorithm;
    fn detail(nodes: &[Self], estimates: Option<Vec<Vec<u64>>>) -> BaselineDetail;
    fn formula_bits(g: &Graph) -> u64;
}

impl Detail for All2AllNode {
    const ALGORITHM: Algorithm = Algorithm::All2All;

    fn detail(_: &[Self], estimates: Option<Vec<Vec<u64>>>) -> BaselineDetail {
        BaselineDetail::All2All { estimates }
    }

    fn formula_bits(g: &Graph) -> u64 {
        metrics::memory_estimate(Algorithm::All2All, g.n(), 0, 0).unwrap_or(0)
    }
}

impl Detail for SingleTreeNode {
    const ALGORITHM: Algorithm = Algorithm::SingleTree;

    fn detail(nodes: &[Self], _: Option<Vec<Vec<u64>>>) -> BaselineDetail {
        let n = nodes.len();
        BaselineDetail::SingleTree {
            completion_rounds: nodes
                .iter()
                .map(|v| v.completed_round().unwrap_or(0))
                .collect(),
            parents: (0..n)
                .map(|o| {
                    nodes
                        .iter()
                        .map(|v| v.query(o).and_then(|q| q.parent))
                        .collect()
                })
                .collect(),
        }
    }

    fn formula_bits(g: &Graph) -> u64 {
        metrics::memory_estimate(Algorithm::SingleTree, g.n(), g.max_degree(), 0).unwrap_or(0)
    }
}

fn run_baseline<T: Detail>(config: &SimConfig, mut nodes: Vec<T>) -> Result<RunResult, SimError> {
    let g = &config.graph;
    let n = g.n();
    let full = config.trace_level == TraceLevel::Full;
    let mut outboxes: Vec<Vec<T::Msg>> = (0..n).map(|_| Vec::new()).collect();
    let mut by_kind = std::collections::BTreeMap::new();
    let mut id_broadcasts = 0u64;
    let mut last_change = None;
    let mut rounds_executed = 0;
    let mut estimates = full.then(Vec::new);
    let mut prev: Vec<u64> = nodes.iter().map(RoundNode::estimate).collect();
    for t in 0..config.t_max() {
        let mut next = Vec::with_capacity(n);
        for (i, v) in nodes.iter_mut().enumerate() {
            let inbox = gather(g, &outboxes, i, T::sort_key);
            let out = v.step(&inbox, t).map_err(protocol_err(t as i64, i))?;
            for m in &out {
                debug_assert_eq!(T::sender(m), i);
                *by_kind.entry(T::kind_name(m)).or_insert(0u64) += 1;
            }
            next.push(out);
        }
        outboxes = next;
        let now: Vec<u64> = nodes.iter().map(RoundNode::estimate).collect();
        if now != prev {
            last_change = Some(t);
        }
        if let Some(est) = estimates.as_mut() {
            est.push(now.clone());
        }
        prev = now;
        rounds_executed = t + 1;
        id_broadcasts += outboxes.iter().flatten().map(T::ids_carried).sum::<u64>();
        if config.early_stop && outboxes.iter().all(Vec::is_empty) {
            break;
        }
    }

    let expected = config.expected_total();
    let final_counts: Vec<ExactCount> = prev.iter().map(|&e| ExactCount::from(e)).collect();
    let correct = final_counts.iter().all(|c| c == &expected);
    let w = metrics::word_bits(n);
    let m_total = by_kind.values().sum();
    let metrics = RunMetrics {
        algorithm: T::ALGORITHM,
        n,
        messages_by_kind: by_kind,
        m1: 0,
        m2: 0,
        m3: 0,
        m4: 0,
        m5: 0,
        m6: 0,
        m_total,
        id_broadcasts: (T::ALGORITHM == Algorithm::All2All).then_some(id_broadcasts),
        t_reduction: None,
        t_broadcast: None,
        t_total: last_change,
        residue_count: 0,
        residue_fraction: 0.into(),
        avg_degree: g.average_degree(),
        memory_bits_per_node: nodes.iter().map(|v| v.memory_words() * w).collect(),
        mem_formula_bits: T::formula_bits(g),
        correct,
    };
    Ok(RunResult {
        algorithm: T::ALGORITHM,
        final_counts,
        rounds_executed,
        t_reduction: None,
        t_converged: last_change,
        residue_ids: Vec::new(),
        metrics,
        trace: None,
        baseline: Some(T::detail(&nodes, estimates)),
    })
}
