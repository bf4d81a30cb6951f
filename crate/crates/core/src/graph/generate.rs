use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::{Graph, NodeId};
use crate::error::GraphError;
use crate::rng::{GraphRng, RETRY_STRIDE};

/// Maximum number of redraws for families that may come out disconnected.
pub const CONNECTIVITY_ATTEMPTS: u32 = 1000;

/// A graph model plus its parameters. `None` parameters take the size-dependent
/// defaults used in the experiments (`p_e = 20/n`, `radius = sqrt(10/n)`).
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    BarabasiAlbert { m: usize },
    ErdosRenyi { p: Option<f64> },
    WattsStrogatz { k: usize, p_rewire: f64 },
    RandomGeometric { radius: Option<f64> },
    Star,
    Complete,
    Path,
    Ring,
    FromFile(PathBuf),
}

impl GraphFamily {
    pub const BA: GraphFamily = GraphFamily::BarabasiAlbert { m: 10 };
    pub const ER: GraphFamily = GraphFamily::ErdosRenyi { p: None };
    pub const WS: GraphFamily = GraphFamily::WattsStrogatz {
        k: 20,
        p_rewire: 0.5,
    };
    pub const RGG: GraphFamily = GraphFamily::RandomGeometric { radius: None };

    /// Short name used on the command line and in CSV output.
    pub fn short_name(&self) -> &'static str {
        match self {
            GraphFamily::BarabasiAlbert { .. } => "ba",
            GraphFamily::ErdosRenyi { .. } => "er",
            GraphFamily::WattsStrogatz { .. } => "ws",
            GraphFamily::RandomGeometric { .. } => "rgg",
            GraphFamily::Star => "star",
            GraphFamily::Complete => "complete",
            GraphFamily::Path => "path",
            GraphFamily::Ring => "ring",
            GraphFamily::FromFile(_) => "file",
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            GraphFamily::BarabasiAlbert { .. }
                | GraphFamily::ErdosRenyi { .. }
                | GraphFamily::WattsStrogatz { .. }
                | GraphFamily::RandomGeometric { .. }
        )
    }

    /// Smallest `n` for which the family's parameters are legal.
    pub fn min_nodes(&self) -> usize {
        match self {
            GraphFamily::BarabasiAlbert { m } => m + 1,
            GraphFamily::ErdosRenyi { p: None } => 20,
            GraphFamily::WattsStrogatz { k, .. } => k + 1,
            GraphFamily::Ring => 3,
            _ => 1,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), GraphError> {
        let bad = |reason: String| {
            Err(GraphError::InvalidParameter {
                family: self.short_name(),
                reason,
            })
        };
        if n == 0 {
            return Err(GraphError::Empty);
        }
        match *self {
            GraphFamily::BarabasiAlbert { m } => {
                if m == 0 {
                    return bad("m must be at least 1".into());
                }
                if n < m + 1 {
                    return bad(format!("n = {n} must be at least m + 1 = {}", m + 1));
                }
            }
            GraphFamily::ErdosRenyi { p } => {
                let p = p.unwrap_or(20.0 / n as f64);
                if !(p > 0.0 && p <= 1.0) {
                    return bad(format!("p_e = {p} must lie in (0, 1]"));
                }
            }
            GraphFamily::WattsStrogatz { k, p_rewire } => {
                if k == 0 || k % 2 != 0 {
                    return bad(format!("k = {k} must be even and positive"));
                }
                if k >= n {
                    return bad(format!("k = {k} must be smaller than n = {n}"));
                }
                if !(0.0..=1.0).contains(&p_rewire) {
                    return bad(format!("p_r = {p_rewire} must lie in [0, 1]"));
                }
            }
            GraphFamily::RandomGeometric { radius } => {
                let r = radius.unwrap_or((10.0 / n as f64).sqrt());
                if !(r.is_finite() && r > 0.0) {
                    return bad(format!("radius = {r} must be positive"));
                }
            }
            GraphFamily::Ring if n < 3 => return bad(format!("a ring needs n >= 3, got {n}")),
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for GraphFamily {
    type Err = String;

    /// Parses the short names with default parameters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "ba" => GraphFamily::BA,
            "er" => GraphFamily::ER,
            "ws" => GraphFamily::WS,
            "rgg" => GraphFamily::RGG,
            "star" => GraphFamily::Star,
            "complete" => GraphFamily::Complete,
            "path" => GraphFamily::Path,
            "ring" => GraphFamily::Ring,
            other => return Err(format!("unknown graph family {other:?}")),
        })
    }
}

/// Draws a connected graph with `n` nodes. The same `(family, n, seed)` always
/// yields the same graph; disconnected draws are retried with
/// `seed + attempt * RETRY_STRIDE`.
pub fn generate(family: &GraphFamily, n: usize, seed: u64) -> Result<Graph, GraphError> {
    family.validate(n)?;
    match family {
        GraphFamily::Star => return Graph::from_edges(n, (1..n).map(|i| (0, i))),
        GraphFamily::Complete => {
            return Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
        }
        GraphFamily::Path => return Graph::from_edges(n, (1..n).map(|i| (i - 1, i))),
        GraphFamily::Ring => return Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))),
        GraphFamily::FromFile(path) => {
            let g = super::load(path)?;
            if g.n() != n {
                return Err(GraphError::InvalidParameter {
                    family: "file",
                    reason: format!("file has {} nodes, expected {n}", g.n()),
                });
            }
            return Ok(g);
        }
        _ => {}
    }
    for attempt in 0..CONNECTIVITY_ATTEMPTS {
        let mut rng =
            GraphRng::new(seed.wrapping_add(u64::from(attempt).wrapping_mul(RETRY_STRIDE)));
        let adjacency = match *family {
            GraphFamily::BarabasiAlbert { m } => barabasi_albert(n, m, &mut rng),
            GraphFamily::ErdosRenyi { p } => erdos_renyi(n, p.unwrap_or(20.0 / n as f64), &mut rng),
            GraphFamily::WattsStrogatz { k, p_rewire } => watts_strogatz(n, k, p_rewire, &mut rng),
            GraphFamily::RandomGeometric { radius } => {
                random_geometric(n, radius.unwrap_or((10.0 / n as f64).sqrt()), &mut rng)
            }
            _ => unreachable!(),
        };
        match Graph::from_sorted_adjacency(adjacency) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GraphError::ConnectivityBudget {
        attempts: CONNECTIVITY_ATTEMPTS,
    })
}

fn sorted(sets: Vec<BTreeSet<NodeId>>) -> Vec<Vec<NodeId>> {
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Seed clique on `m + 1` nodes, then each new node attaches to `m` distinct
/// targets drawn proportionally to degree.
fn barabasi_albert(n: usize, m: usize, rng: &mut GraphRng) -> Vec<Vec<NodeId>> {
    let mut adj = vec![BTreeSet::new(); n];
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * n * m);
    for u in 0..=m {
        for v in u + 1..=m {
            adj[u].insert(v);
            adj[v].insert(u);
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut targets = BTreeSet::new();
    for v in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let pick = endpoints[rng.below(endpoints.len() as u64) as usize];
            targets.insert(pick);
        }
        for &t in &targets {
            adj[v].insert(t);
            adj[t].insert(v);
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    sorted(adj)
}

/// G(n, p) by geometric skipping over the lower triangle (Batagelj-Brandes).
fn erdos_renyi(n: usize, p: f64, rng: &mut GraphRng) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); n];
    if p >= 1.0 {
        for (u, row) in adj.iter_mut().enumerate() {
            *row = (0..n).filter(|&v| v != u).collect();
        }
        return adj;
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r = rng.next_f64();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            let u = w as usize;
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Ring lattice with `k/2` neighbors per side; each clockwise edge `(u, u+j)`
/// is rewired with probability `p` to a uniformly drawn new endpoint.
fn watts_strogatz(n: usize, k: usize, p: f64, rng: &mut GraphRng) -> Vec<Vec<NodeId>> {
    let mut adj = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !rng.bernoulli(p) || !adj[u].contains(&v) || adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.below(n as u64) as usize;
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    sorted(adj)
}

/// `n` uniform points in the unit square; edge iff distance <= radius.
fn random_geometric(n: usize, radius: f64, rng: &mut GraphRng) -> Vec<Vec<NodeId>> {
    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.next_f64(), rng.next_f64())).collect();
    let cells = ((1.0 / radius).floor() as usize).clamp(1, 4096);
    let cell_of = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut grid: Vec<Vec<NodeId>> = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in points.iter().enumerate() {
        grid[cell_of(y) * cells + cell_of(x)].push(i);
    }
    let r2 = radius * radius;
    let mut adj = vec![Vec::new(); n];
    for (i, &(x, y)) in points.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &grid[gy * cells + gx] {
                    if j <= i {
                        continue;
                    }
                    let (dx, dy) = (points[j].0 - x, points[j].1 - y);
                    if dx * dx + dy * dy <= r2 {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}
