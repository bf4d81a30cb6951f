//! Parameter sweeps, per-run CSV rows and aggregate statistics.
//!
//! Runs are independent and execute on the rayon pool; rows always come out
//! in spec order (family, size, repeat, algorithm), so the same spec yields
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_rational::Rational64;
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{run, Algorithm, SimConfig, TraceLevel};
use crate::error::{GraphError, SimError};
use crate::graph::{generate, GraphFamily};
use crate::metrics::RunMetrics;
use crate::rng::mix64;

pub const DEFAULT_SIZES: [usize; 7] = [100, 215, 464, 1000, 2154, 4642, 10000];
pub const DEFAULT_REPEATS: usize = 30;
pub const PAPER_REPEATS: usize = 1000;

pub const CSV_HEADER: &str = "topology,n,seed,algorithm,t_reduction,t_broadcast,t_total,\
m1,m2,m3,m4,m5,m6,m_total,r,x,x_exact,d_avg,diameter,mem_max_bits,mem_formula_bits,correct";

pub const AGGREGATE_HEADER: &str = "topology,n,algorithm,runs,correct_runs,\
t_total_mean,t_total_ci_low,t_total_ci_high,x_mean,x_ci_low,x_ci_high";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Invalid(String),
    #[error("{family} n={n} seed={seed}: {source}")]
    Graph {
        family: String,
        n: usize,
        seed: u64,
        #[source]
        source: GraphError,
    },
    #[error("{family} n={n} seed={seed} {algorithm}: {source}")]
    Run {
        family: String,
        n: usize,
        seed: u64,
        algorithm: Algorithm,
        #[source]
        source: SimError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub families: Vec<GraphFamily>,
    /// Ascending.
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// `n_max = ceil(n * nmax_slack)`.
    pub nmax_slack: f64,
    pub early_stop: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            families: vec![
                GraphFamily::BA,
                GraphFamily::ER,
                GraphFamily::WS,
                GraphFamily::RGG,
            ],
            sizes: DEFAULT_SIZES.to_vec(),
            repeats: DEFAULT_REPEATS,
            base_seed: 0,
            algorithms: vec![Algorithm::Anb],
            nmax_slack: 1.0,
            early_stop: true,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::Invalid(m.to_string()));
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.families.is_empty() || self.sizes.is_empty() || self.algorithms.is_empty() {
            return bad("families, sizes and algorithms must be non-empty");
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sizes must be strictly ascending");
        }
        if !(self.nmax_slack >= 1.0 && self.nmax_slack.is_finite()) {
            return bad("nmax slack must be a finite number >= 1");
        }
        for f in &self.families {
            for &n in &self.sizes {
                f.validate(n)
                    .map_err(|e| SweepError::Invalid(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn n_max(&self, n: usize) -> usize {
        ((n as f64 * self.nmax_slack).ceil() as usize).max(n)
    }

    /// Graph seed for one (family, size, repeat) cell.
    pub fn derive_seed(&self, family: &GraphFamily, n: usize, repeat: usize) -> u64 {
        let name = family
            .short_name()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
            });
        self.base_seed ^ mix64(name ^ mix64(n as u64) ^ mix64(repeat as u64).rotate_left(17))
    }
}

/// One run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub topology: String,
    pub seed: u64,
    pub diameter: usize,
    pub metrics: RunMetrics,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        csv_line(&self.topology, self.seed, self.diameter, &self.metrics)
    }
}

/// Decimal with 6 significant digits, trailing zeros trimmed.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() {
            "0".into()
        } else {
            v.to_string()
        };
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// One CSV row in [`CSV_HEADER`] order. Columns that do not apply to the
/// algorithm are left empty.
pub fn csv_line(topology: &str, seed: u64, diameter: usize, m: &RunMetrics) -> String {
    let opt = |v: Option<u64>| v.map_or(String::new(), |v| v.to_string());
    let anb = m.algorithm == Algorithm::Anb;
    let per_kind = |v: u64| if anb { v.to_string() } else { String::new() };
    let mut s = String::new();
    let _ = write!(
        s,
        "{topology},{},{seed},{},{},{},{},",
        m.n,
        m.algorithm,
        opt(m.t_reduction),
        opt(m.t_broadcast),
        opt(m.t_total)
    );
    for v in [m.m1, m.m2, m.m3, m.m4, m.m5, m.m6] {
        let _ = write!(s, "{},", per_kind(v));
    }
    let _ = write!(s, "{},", m.m_total);
    if anb {
        let x = m.residue_fraction;
        let _ = write!(
            s,
            "{},{},{}/{},",
            m.residue_count,
            sig6(ratio_f64(x)),
            x.numer(),
            x.denom()
        );
    } else {
        s.push_str(",,,");
    }
    let _ = write!(
        s,
        "{},{diameter},{},{},{}",
        sig6(ratio_f64(m.avg_degree)),
        m.mem_max_bits(),
        m.mem_formula_bits,
        m.correct
    );
    s
}

/// Mean and 95% interval (`mean ± 1.96 · stderr`, sample variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

/// Mean is exact over the rationals; only the square root is floating point.
pub fn mean_ci(values: &[Rational64]) -> Option<Interval> {
    if values.is_empty() {
        return None;
    }
    let k = values.len() as i64;
    let mean: Rational64 = values.iter().sum::<Rational64>() / k;
    let half = if k > 1 {
        let ss: Rational64 = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        let var = ss / (k - 1);
        1.96 * (ratio_f64(var) / k as f64).sqrt()
    } else {
        0.0
    };
    let m = ratio_f64(mean);
    Some(Interval {
        mean: m,
        low: m - half,
        high: m + half,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub topology: String,
    pub n: usize,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub correct_runs: usize,
    pub t_total: Option<Interval>,
    pub x: Option<Interval>,
}

impl AggregateRow {
    pub fn csv_line(&self) -> String {
        let iv = |i: Option<Interval>| {
            i.map_or(",,".to_string(), |i| {
                format!("{},{},{}", sig6(i.mean), sig6(i.low), sig6(i.high))
            })
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.topology,
            self.n,
            self.algorithm,
            self.runs,
            self.correct_runs,
            iv(self.t_total),
            iv(self.x)
        )
    }
}

/// Groups rows by (topology, n, algorithm), in first-appearance order.
pub fn aggregate(rows: &[SweepRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, usize, Algorithm)> = Vec::new();
    for r in rows {
        let key = (r.topology.clone(), r.metrics.n, r.metrics.algorithm);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(topology, n, algorithm)| {
            let group: Vec<&RunMetrics> = rows
                .iter()
                .filter(|r| {
                    r.topology == topology && r.metrics.n == n && r.metrics.algorithm == algorithm
                })
                .map(|r| &r.metrics)
                .collect();
            let t: Option<Vec<Rational64>> = group
                .iter()
                .map(|m| m.t_total.map(|t| Rational64::from_integer(t as i64)))
                .collect();
            let x: Vec<Rational64> = group.iter().map(|m| m.residue_fraction).collect();
            AggregateRow {
                runs: group.len(),
                correct_runs: group.iter().filter(|m| m.correct).count(),
                t_total: t.and_then(|t| mean_ci(&t)),
                x: if algorithm == Algorithm::Anb {
                    mean_ci(&x)
                } else {
                    None
                },
                topology,
                n,
                algorithm,
            }
        })
        .collect()
}

/// Executes every run of the spec.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for family in &spec.families {
        for &n in &spec.sizes {
            for repeat in 0..spec.repeats {
                jobs.push((family, n, spec.derive_seed(family, n, repeat)));
            }
        }
    }
    let results: Vec<Result<Vec<SweepRow>, SweepError>> = jobs
        .par_iter()
        .map(|&(family, n, seed)| {
            let graph = generate(family, n, seed).map_err(|source| SweepError::Graph {
                family: family.short_name().to_string(),
                n,
                seed,
                source,
            })?;
            let diameter = graph.diameter();
            let mut rows = Vec::with_capacity(spec.algorithms.len());
            for &algorithm in &spec.algorithms {
                let mut config =
                    SimConfig::new(graph.clone(), algorithm).with_trace(TraceLevel::Metrics);
                config.n_max = spec.n_max(n);
                config.early_stop = spec.early_stop;
                let result = run(&config).map_err(|source| SweepError::Run {
                    family: family.short_name().to_string(),
                    n,
                    seed,
                    algorithm,
                    source,
                })?;
                rows.push(SweepRow {
                    topology: family.short_name().to_string(),
                    seed,
                    diameter,
                    metrics: result.metrics,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Writes through a temporary sibling and renames, so a failed write never
/// leaves a partial file at `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), SweepError> {
    let io_err = |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = fs::write(&tmp, contents).and_then(|()| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

/// Path of the aggregate file next to a per-run CSV: `runs.csv` ->
/// `runs.aggregate.csv`.
pub fn aggregate_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.aggregate.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(0.02), "0.02");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(9796.02), "9796.02");
        assert_eq!(sig6(123456789.0), "123456789");
        assert_eq!(sig6(19.9), "19.9");
        assert_eq!(sig6(-2.5), "-2.5");
    }

    #[test]
    fn ci_of_constant_and_pair() {
        let c = mean_ci(&[Rational64::from_integer(4); 5]).unwrap();
        assert_eq!((c.mean, c.low, c.high), (4.0, 4.0, 4.0));
        let p = mean_ci(&[Rational64::from_integer(1), Rational64::from_integer(3)]).unwrap();
        // sample sd = sqrt(2), stderr = 1
        assert_eq!(p.mean, 2.0);
        assert!((p.high - 3.96).abs() < 1e-12);
        assert!(mean_ci(&[]).is_none());
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec::default();
        assert!(s.validate().is_ok());
        s.repeats = 0;
        assert!(s.validate().is_err());
        let s = SweepSpec {
            sizes: vec![100, 50],
            ..SweepSpec::default()
        };
        assert!(s.validate().is_err());
        let s = SweepSpec {
            sizes: vec![10],
            ..SweepSpec::default()
        };
        assert!(s.validate().is_err(), "ER needs n >= 20");
    }

    #[test]
    fn seeds_differ_per_cell() {
        let s = SweepSpec::default();
        let a = s.derive_seed(&GraphFamily::BA, 100, 0);
        assert_ne!(a, s.derive_seed(&GraphFamily::BA, 100, 1));
        assert_ne!(a, s.derive_seed(&GraphFamily::ER, 100, 0));
        assert_ne!(a, s.derive_seed(&GraphFamily::BA, 215, 0));
        assert_eq!(
            a,
            SweepSpec::default().derive_seed(&GraphFamily::BA, 100, 0)
        );
    }

    #[test]
    fn aggregate_path_name() {
        assert_eq!(
            aggregate_path(Path::new("/tmp/runs.csv")),
            PathBuf::from("/tmp/runs.aggregate.csv")
        );
    }
}
