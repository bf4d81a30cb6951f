//! Message and memory accounting, plus the closed-form cost expressions used
//! to cross-check measured runs.
//!
//! Every envelope counts once no matter how many neighbors receive it. The
//! aggregate-and-broadcast totals are split by message type: `m1` echo, `m2`
//! degree, `m3` leaf, `m4` count, `m5` reduce, `m6` broadcast.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;

use crate::engine::Algorithm;
use crate::error::MetricsError;
use crate::exact::ExactCount;
use crate::protocol::{KindCounts, MessageKind, NodeState};
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub algorithm: Algorithm,
    pub n: usize,
    pub messages_by_kind: BTreeMap<&'static str, u64>,
    pub m1: u64,
    pub m2: u64,
    pub m3: u64,
    pub m4: u64,
    pub m5: u64,
    pub m6: u64,
    /// All envelopes sent, pre-iteration included.
    pub m_total: u64,
    /// All-to-all only: ids carried by all envelopes.
    pub id_broadcasts: Option<u64>,
    pub t_reduction: Option<u64>,
    pub t_broadcast: Option<u64>,
    pub t_total: Option<u64>,
    pub residue_count: u64,
    pub residue_fraction: Rational64,
    pub avg_degree: Rational64,
    pub memory_bits_per_node: Vec<u64>,
    pub mem_formula_bits: u64,
    pub correct: bool,
}

impl RunMetrics {
    pub fn mem_max_bits(&self) -> u64 {
        self.memory_bits_per_node.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for RunMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<u64>| v.map_or("-".to_string(), |v| v.to_string());
        writeln!(f, "algorithm      {}", self.algorithm)?;
        writeln!(f, "nodes          {}", self.n)?;
        writeln!(f, "correct        {}", self.correct)?;
        writeln!(
            f,
            "rounds         reduction={} broadcast={} total={}",
            opt(self.t_reduction),
            opt(self.t_broadcast),
            opt(self.t_total)
        )?;
        let kinds: Vec<String> = self
            .messages_by_kind
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(f, "messages       {} ({})", self.m_total, kinds.join(" "))?;
        if let Some(ids) = self.id_broadcasts {
            writeln!(f, "id broadcasts  {ids}")?;
        }
        if self.algorithm == Algorithm::Anb {
            writeln!(
                f,
                "residues       r={} x={}",
                self.residue_count, self.residue_fraction
            )?;
        }
        writeln!(f, "avg degree     {}", self.avg_degree)?;
        write!(
            f,
            "memory bits    max={} formula={}",
            self.mem_max_bits(),
            self.mem_formula_bits
        )
    }
}

/// Bits needed per id or counter value in a network of `n` nodes.
pub(crate) fn word_bits(n: usize) -> u64 {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1) as u64
}

/// Inputs shared by the engine's incremental accounting and [`collect`].
pub(crate) struct AnbTallies<'a> {
    pub n: usize,
    pub degrees: &'a [usize],
    pub envelopes: KindCounts,
    pub t_reduction: Option<u64>,
    pub t_converged: Option<u64>,
    pub residue_count: u64,
    pub residues_known: Vec<usize>,
    pub correct: bool,
}

pub(crate) fn anb_metrics(t: AnbTallies<'_>) -> RunMetrics {
    let n = t.n;
    let w = word_bits(n);
    let memory_bits_per_node = t
        .degrees
        .iter()
        .zip(&t.residues_known)
        .map(|(&d, &r)| (2 * d as u64 + r as u64 + 5) * w)
        .collect();
    let max_deg = t.degrees.iter().copied().max().unwrap_or(0);
    let m = |k| t.envelopes.get(k);
    RunMetrics {
        algorithm: Algorithm::Anb,
        n,
        messages_by_kind: MessageKind::ALL.iter().map(|&k| (k.name(), m(k))).collect(),
        m1: m(MessageKind::Echo),
        m2: m(MessageKind::Degree),
        m3: m(MessageKind::Leaf),
        m4: m(MessageKind::Count),
        m5: m(MessageKind::Reduce),
        m6: m(MessageKind::Broadcast),
        m_total: t.envelopes.total(),
        id_broadcasts: None,
        t_reduction: t.t_reduction,
        t_broadcast: match (t.t_converged, t.t_reduction) {
            (Some(c), Some(r)) => Some(c.saturating_sub(r)),
            _ => None,
        },
        t_total: t.t_converged,
        residue_count: t.residue_count,
        residue_fraction: Rational64::new(t.residue_count as i64, n as i64),
        avg_degree: Rational64::new(t.degrees.iter().sum::<usize>() as i64, n as i64),
        memory_bits_per_node,
        mem_formula_bits: memory_estimate(Algorithm::Anb, n, max_deg, t.residue_count as usize)
            .unwrap_or(0),
        correct: t.correct,
    }
}

/// Recomputes the metrics of an aggregate-and-broadcast run from its full
/// trace alone.
pub fn collect(trace: &RunTrace) -> Result<RunMetrics, MetricsError> {
    let n = trace.n;
    if n == 0 {
        return Err(MetricsError::ZeroSize);
    }
    if trace.rounds.is_empty() {
        return Err(MetricsError::IncompleteTrace("no rounds recorded"));
    }
    if trace.final_nodes.len() != n || trace.degrees.len() != n {
        return Err(MetricsError::IncompleteTrace("node count mismatch"));
    }
    for (i, rt) in trace.rounds.iter().enumerate() {
        if rt.round != i as u64 || rt.nodes.len() != n || rt.delivered.len() != n {
            return Err(MetricsError::IncompleteTrace("rounds not contiguous"));
        }
    }
    let mut envelopes = trace.pre_iteration;
    let mut was_residue = vec![false; n];
    let mut t_reduction = None;
    let mut t_converged = None;
    for (t, rt) in trace.rounds.iter().enumerate() {
        for m in &rt.emitted {
            envelopes.add(m.kind(), 1);
        }
        let mut busy = false;
        for (i, s) in rt.nodes.iter().enumerate() {
            match s.state {
                NodeState::Residue => was_residue[i] = true,
                NodeState::Active | NodeState::Leaf => busy = true,
                NodeState::Inactive => {}
            }
        }
        if !busy && t_reduction.is_none() {
            t_reduction = Some(t as u64);
        }
        let next = trace.snapshot(t as u64 + 1).expect("contiguous");
        if rt
            .nodes
            .iter()
            .zip(next)
            .any(|(a, b)| a.n_final != b.n_final)
        {
            t_converged = Some(t as u64);
        }
    }
    let finals: Vec<&ExactCount> = trace.final_nodes.iter().map(|s| &s.n_final).collect();
    let agree = finals.windows(2).all(|w| w[0] == w[1]);
    Ok(anb_metrics(AnbTallies {
        n,
        degrees: &trace.degrees,
        envelopes,
        t_reduction,
        t_converged: if agree { t_converged } else { None },
        residue_count: was_residue.iter().filter(|&&r| r).count() as u64,
        residues_known: trace.final_nodes.iter().map(|s| s.residues).collect(),
        correct: finals.iter().all(|&v| v == &trace.expected_total),
    }))
}

fn check_sizes(n: u64, r: u64) -> Result<(), MetricsError> {
    if n == 0 {
        return Err(MetricsError::ZeroSize);
    }
    if r > n {
        return Err(MetricsError::ResidueExceedsSize { r, n });
    }
    Ok(())
}

/// Upper bound on total aggregate-and-broadcast messages,
/// `4N - Nx + Nd + N^2 x` with `x = r/N`, i.e. `N(4 + d) + r(N - 1)`.
pub fn anb_comm_bound(n: u64, r: u64, d: Rational64) -> Result<Rational64, MetricsError> {
    check_sizes(n, r)?;
    let n = n as i64;
    let x = Rational64::new(r as i64, n);
    let n_r = Rational64::from_integer(n);
    Ok(n_r * 4 - n_r * x + n_r * d + n_r * n_r * x)
}

/// The tabulated form of the same cost, `N(4 + r + d) - r`.
pub fn anb_comm_table(n: u64, r: u64, d: Rational64) -> Result<Rational64, MetricsError> {
    check_sizes(n, r)?;
    let (n, r) = (n as i64, r as i64);
    Ok(Rational64::from_integer(n) * (Rational64::from_integer(4 + r) + d) - r)
}

/// Average degree below which aggregate-and-broadcast sends fewer messages
/// than all-to-all flooding: `N(1 - x) + x - 4`.
pub fn comm_threshold(n: u64, x: Rational64) -> Rational64 {
    let one = Rational64::from_integer(1);
    Rational64::from_integer(n as i64) * (one - x) + x - 4
}

/// Per-node memory in bits, rounded up, with `log2` as the id width:
/// aggregate-and-broadcast `(2 d_i + r + 5) log N`, all-to-all `N log N`,
/// single tree `2 N log N + d_i N`.
pub fn memory_estimate(
    algorithm: Algorithm,
    n: usize,
    d_i: usize,
    r: usize,
) -> Result<u64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::ZeroSize);
    }
    let log_n = (n as f64).log2();
    let bits = match algorithm {
        Algorithm::Anb => (2 * d_i + r + 5) as f64 * log_n,
        Algorithm::All2All => n as f64 * log_n,
        Algorithm::SingleTree => 2.0 * n as f64 * log_n + (d_i * n) as f64,
    };
    Ok(bits.ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comm_bound_values() {
        assert_eq!(
            anb_comm_bound(3, 3, Rational64::from_integer(2)).unwrap(),
            Rational64::from_integer(24)
        );
        assert_eq!(
            anb_comm_bound(1, 1, Rational64::from_integer(0)).unwrap(),
            Rational64::from_integer(4)
        );
        assert!(matches!(
            anb_comm_bound(3, 4, Rational64::from_integer(2)),
            Err(MetricsError::ResidueExceedsSize { .. })
        ));
    }

    #[test]
    fn table_form_agrees_with_expansion() {
        for n in 1..30u64 {
            for r in 0..=n {
                for d in [Rational64::new(3, 2), Rational64::from_integer(7)] {
                    assert_eq!(anb_comm_bound(n, r, d), anb_comm_table(n, r, d));
                }
            }
        }
    }

    #[test]
    fn threshold_values() {
        assert_eq!(
            comm_threshold(50, Rational64::from_integer(1)),
            Rational64::from_integer(-3)
        );
        assert_eq!(
            comm_threshold(10_000, Rational64::new(1, 50)),
            Rational64::new(979_602, 100)
        );
        // x -> 0 limit
        assert_eq!(
            comm_threshold(10_000, Rational64::from_integer(0)),
            Rational64::from_integer(9996)
        );
    }

    #[test]
    fn memory_values() {
        assert_eq!(memory_estimate(Algorithm::Anb, 1024, 10, 5).unwrap(), 300);
        assert_eq!(
            memory_estimate(Algorithm::All2All, 1024, 0, 0).unwrap(),
            10240
        );
        assert_eq!(
            memory_estimate(Algorithm::SingleTree, 1024, 10, 0).unwrap(),
            2 * 10240 + 10240
        );
        assert_eq!(
            memory_estimate(Algorithm::Anb, 0, 1, 1),
            Err(MetricsError::ZeroSize)
        );
        // Worst case d_i = n - 1, r = n: about 3 N log N, above all-to-all.
        let n = 4096;
        let worst = memory_estimate(Algorithm::Anb, n, n - 1, n).unwrap();
        let flood = memory_estimate(Algorithm::All2All, n, 0, 0).unwrap();
        assert!(worst > flood);
        assert!((worst as f64 / (3.0 * n as f64 * 12.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn word_width() {
        assert_eq!(word_bits(1), 1);
        assert_eq!(word_bits(2), 1);
        assert_eq!(word_bits(1024), 10);
        assert_eq!(word_bits(1025), 11);
    }
}
