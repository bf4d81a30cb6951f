//! C ABI over `anb-core`.
//!
//! Graphs and results are opaque heap handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns an
//! `AnbStatus`; on failure a description is kept per thread and can be read
//! with `anb_last_error_message`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anb_core::graph::{self, GraphFamily};
use anb_core::{
    run, run_with_oracle, Algorithm, ExactCount, Graph, Mode, SimConfig, SimError, TraceLevel,
};

/// Marks an absent value in `AnbMetrics`, e.g. a round that never happened.
pub const ANB_NONE: u64 = u64::MAX;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Graph = 3,
    Simulation = 4,
    Oracle = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnbAlgorithm {
    Anb = 0,
    AllToAll = 1,
    SingleTree = 2,
}

impl From<AnbAlgorithm> for Algorithm {
    fn from(a: AnbAlgorithm) -> Self {
        match a {
            AnbAlgorithm::Anb => Algorithm::Anb,
            AnbAlgorithm::AllToAll => Algorithm::All2All,
            AnbAlgorithm::SingleTree => Algorithm::SingleTree,
        }
    }
}

/// Run options. Zero-initialise and set what you need.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnbRunOptions {
    pub algorithm: AnbAlgorithm,
    /// Upper bound on the network size; 0 means the graph's own size.
    pub n_max: u64,
    /// Run the invariant checker (aggregate-and-broadcast only).
    pub verify: bool,
    /// Keep running until the round budget even when the network is quiet.
    pub no_early_stop: bool,
}

/// Scalar results of one run. Rounds that did not occur are `ANB_NONE`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AnbMetrics {
    pub n: u64,
    pub correct: bool,
    pub rounds_executed: u64,
    pub t_reduction: u64,
    pub t_broadcast: u64,
    pub t_total: u64,
    pub m1: u64,
    pub m2: u64,
    pub m3: u64,
    pub m4: u64,
    pub m5: u64,
    pub m6: u64,
    pub m_total: u64,
    /// All-to-all only, otherwise `ANB_NONE`.
    pub id_broadcasts: u64,
    pub residue_count: u64,
    pub residue_fraction: f64,
    pub avg_degree: f64,
    pub mem_max_bits: u64,
    pub mem_formula_bits: u64,
}

/// Opaque graph handle.
pub struct AnbGraph(Graph);

/// Opaque run result handle.
pub struct AnbResult {
    metrics: AnbMetrics,
    final_counts: Vec<ExactCount>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(AnbStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AnbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnbStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AnbStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(AnbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(AnbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn graph_fail(e: anb_core::GraphError) -> Fail {
    Fail(AnbStatus::Graph, e.to_string())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn anb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn anb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates a connected graph. `family` is one of `ba`, `er`, `ws`, `rgg`,
/// `star`, `complete`, `path`, `ring`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anb_graph_generate(
    family: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut AnbGraph,
) -> AnbStatus {
    guard(|| {
        let name = c_str(family, "family")?;
        let family: GraphFamily = name
            .parse()
            .map_err(|e| Fail(AnbStatus::InvalidArgument, e))?;
        let g = graph::generate(&family, n, seed).map_err(graph_fail)?;
        store(out, AnbGraph(g))
    })
}

/// Builds a graph from `edge_count` pairs laid out as `u0, v0, u1, v1, ...`.
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values (or be NULL when
/// `edge_count` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anb_graph_from_edges(
    n: usize,
    edges: *const usize,
    edge_count: usize,
    out: *mut *mut AnbGraph,
) -> AnbStatus {
    guard(|| {
        let flat: &[usize] = if edge_count == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * edge_count)
        };
        let g =
            Graph::from_edges(n, flat.chunks_exact(2).map(|p| (p[0], p[1]))).map_err(graph_fail)?;
        store(out, AnbGraph(g))
    })
}

/// Loads a whitespace-separated edge list file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anb_graph_load(path: *const c_char, out: *mut *mut AnbGraph) -> AnbStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let g = graph::load(path).map_err(graph_fail)?;
        store(out, AnbGraph(g))
    })
}

/// # Safety
/// `g` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anb_graph_free(g: *mut AnbGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of nodes, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anb_graph_node_count(g: *const AnbGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// Number of undirected edges, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anb_graph_edge_count(g: *const AnbGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Longest shortest path, or 0 for NULL.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anb_graph_diameter(g: *const AnbGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.diameter())
}

fn config(g: &Graph, opts: &AnbRunOptions) -> SimConfig {
    let mut cfg = SimConfig::new(g.clone(), opts.algorithm.into());
    if opts.n_max > 0 {
        cfg.n_max = usize::try_from(opts.n_max).unwrap_or(usize::MAX);
    }
    cfg.early_stop = !opts.no_early_stop;
    if opts.verify {
        cfg.trace_level = TraceLevel::Full;
    }
    cfg
}

fn execute(cfg: &SimConfig, verify: bool) -> Result<AnbResult, Fail> {
    let result = if verify {
        run_with_oracle(cfg).map(|(r, _)| r)
    } else {
        run(cfg)
    };
    let r = result.map_err(|e| match e {
        SimError::Oracle(_) => Fail(AnbStatus::Oracle, e.to_string()),
        SimError::NMaxTooSmall { .. } | SimError::ValueCount { .. } | SimError::OracleAlgorithm => {
            Fail(AnbStatus::InvalidArgument, e.to_string())
        }
        _ => Fail(AnbStatus::Simulation, e.to_string()),
    })?;
    let m = &r.metrics;
    let opt = |v: Option<u64>| v.unwrap_or(ANB_NONE);
    let metrics = AnbMetrics {
        n: m.n as u64,
        correct: m.correct,
        rounds_executed: r.rounds_executed,
        t_reduction: opt(m.t_reduction),
        t_broadcast: opt(m.t_broadcast),
        t_total: opt(m.t_total),
        m1: m.m1,
        m2: m.m2,
        m3: m.m3,
        m4: m.m4,
        m5: m.m5,
        m6: m.m6,
        m_total: m.m_total,
        id_broadcasts: opt(m.id_broadcasts),
        residue_count: m.residue_count,
        residue_fraction: *m.residue_fraction.numer() as f64 / *m.residue_fraction.denom() as f64,
        avg_degree: *m.avg_degree.numer() as f64 / *m.avg_degree.denom() as f64,
        mem_max_bits: m.mem_max_bits(),
        mem_formula_bits: m.mem_formula_bits,
    };
    Ok(AnbResult {
        metrics,
        final_counts: r.final_counts,
    })
}

/// Runs one simulation in counting mode.
///
/// # Safety
/// `g` must be a live handle, `opts` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn anb_run(
    g: *const AnbGraph,
    opts: *const AnbRunOptions,
    out: *mut *mut AnbResult,
) -> AnbStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let opts = opts.as_ref().ok_or_else(|| null("options"))?;
        let result = execute(&config(&g.0, opts), opts.verify)?;
        store(out, result)
    })
}

/// Runs aggregate-and-broadcast in summation mode; node `i` starts with
/// `numerators[i] / denominators[i]`, which must be positive.
///
/// # Safety
/// `g` must be a live handle; both arrays must hold `len` values; `opts`
/// readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn anb_run_sum(
    g: *const AnbGraph,
    numerators: *const i64,
    denominators: *const i64,
    len: usize,
    opts: *const AnbRunOptions,
    out: *mut *mut AnbResult,
) -> AnbStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let opts = opts.as_ref().ok_or_else(|| null("options"))?;
        if opts.algorithm != AnbAlgorithm::Anb {
            return Err(Fail(
                AnbStatus::InvalidArgument,
                "summation mode needs the aggregate-and-broadcast algorithm".into(),
            ));
        }
        if len > 0 && (numerators.is_null() || denominators.is_null()) {
            return Err(null("values"));
        }
        let (nums, dens): (&[i64], &[i64]) = if len == 0 {
            (&[], &[])
        } else {
            (
                std::slice::from_raw_parts(numerators, len),
                std::slice::from_raw_parts(denominators, len),
            )
        };
        let values = nums
            .iter()
            .zip(dens)
            .map(|(&a, &b)| ExactCount::new(a, b))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Fail(AnbStatus::InvalidArgument, "zero denominator".into()))?;
        let mut cfg = config(&g.0, opts);
        cfg.mode = Mode::Sum(values);
        store(out, execute(&cfg, opts.verify)?)
    })
}

/// Copies the scalar results into `out`.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn anb_result_metrics(
    r: *const AnbResult,
    out: *mut AnbMetrics,
) -> AnbStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.metrics;
        Ok(())
    })
}

/// Whether every node finished with the exact total; false for NULL.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anb_result_correct(r: *const AnbResult) -> bool {
    r.as_ref().is_some_and(|r| r.metrics.correct)
}

/// Writes node `node`'s final value as `num/den` (NUL-terminated) into `buf`.
/// `needed` receives the buffer size required, terminator included; call with
/// `buf_len == 0` to query it.
///
/// # Safety
/// `r` must be a live handle; `buf` must hold `buf_len` bytes; `needed` must be
/// writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn anb_result_final_count(
    r: *const AnbResult,
    node: usize,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> AnbStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        let value = r.final_counts.get(node).ok_or_else(|| {
            Fail(
                AnbStatus::InvalidArgument,
                format!(
                    "node {node} out of range for {} nodes",
                    r.final_counts.len()
                ),
            )
        })?;
        let text = value.to_fraction_string();
        let size = text.len() + 1;
        if let Some(n) = needed.as_mut() {
            *n = size;
        }
        if buf_len < size {
            return Err(Fail(
                AnbStatus::BufferTooSmall,
                format!("buffer holds {buf_len} bytes, {size} needed"),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anb_result_free(r: *mut AnbResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
