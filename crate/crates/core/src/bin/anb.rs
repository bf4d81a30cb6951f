use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anb_core::corpus::verification_corpus;
use anb_core::graph::{self, Graph, GraphFamily};
use anb_core::sweep::{self, SweepSpec};
use anb_core::trace::parse_dump;
use anb_core::{run, Algorithm, ExactCount, FaultInjection, Mode, SimConfig, SimError, TraceLevel};

const USAGE: u8 = 2;
const FAILED: u8 = 1;

#[derive(Parser)]
#[command(
    name = "anb",
    version,
    about = "Aggregate-and-broadcast node counting simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one graph.
    Run(RunArgs),
    /// Run a grid of families, sizes and repeats and write CSV files.
    Sweep(SweepArgs),
    /// Check every invariant on the fixed verification corpus.
    Verify(VerifyArgs),
    /// Summarize a trace dump or a graph.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ba,
    Er,
    Ws,
    Rgg,
    Star,
    Complete,
    Path,
    Ring,
}

impl FamilyArg {
    fn family(self) -> GraphFamily {
        match self {
            FamilyArg::Ba => GraphFamily::BA,
            FamilyArg::Er => GraphFamily::ER,
            FamilyArg::Ws => GraphFamily::WS,
            FamilyArg::Rgg => GraphFamily::RGG,
            FamilyArg::Star => GraphFamily::Star,
            FamilyArg::Complete => GraphFamily::Complete,
            FamilyArg::Path => GraphFamily::Path,
            FamilyArg::Ring => GraphFamily::Ring,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Anb,
    All2all,
    St,
}

impl AlgoArg {
    fn algorithm(self) -> Algorithm {
        match self {
            AlgoArg::Anb => Algorithm::Anb,
            AlgoArg::All2all => Algorithm::All2All,
            AlgoArg::St => Algorithm::SingleTree,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ModeArg {
    Count,
    Sum,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(
        long,
        value_enum,
        conflicts_with = "graph_file",
        required_unless_present = "graph_file"
    )]
    family: Option<FamilyArg>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), requires = "family")]
    n: Option<u64>,
    #[arg(long, env = "ANB_SEED", default_value_t = 0)]
    seed: u64,
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

impl GraphArgs {
    fn build(&self) -> Result<(Graph, String), String> {
        if let Some(path) = &self.graph_file {
            return graph::load(path)
                .map(|g| (g, "file".to_string()))
                .map_err(|e| e.to_string());
        }
        let family = self
            .family
            .expect("clap enforces family or graph file")
            .family();
        let n = self.n.ok_or("--n is required with --family")? as usize;
        graph::generate(&family, n, self.seed)
            .map(|g| (g, family.short_name().to_string()))
            .map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "anb")]
    algo: AlgoArg,
    #[arg(long, value_enum, default_value = "count")]
    mode: ModeArg,
    /// One positive rational per line, node order (sum mode).
    #[arg(long)]
    values: Option<PathBuf>,
    /// Check every invariant on the full trace.
    #[arg(long)]
    verify: bool,
    /// Write the round-by-round trace dump here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a one-row metrics CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Multiply the known size bound n_max by this factor.
    #[arg(long, default_value_t = 1.0)]
    nmax_slack: f64,
    #[arg(long)]
    no_early_stop: bool,
    /// Double every count payload (exercises the invariant checks).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "family", value_enum, value_delimiter = ',')]
    families: Vec<FamilyArg>,
    /// Comma-separated ascending sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Use the published repeat count.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, env = "ANB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long = "algo", value_enum, value_delimiter = ',')]
    algos: Vec<AlgoArg>,
    /// Per-run CSV; the aggregate goes next to it as `<stem>.aggregate.csv`.
    #[arg(long, default_value = "sweep.csv")]
    csv: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    nmax_slack: f64,
    #[arg(long)]
    no_early_stop: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Skip corpus graphs with more nodes than this.
    #[arg(long)]
    n_cap: Option<usize>,
    /// Double every count payload; every run should then fail.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args)]
struct InspectArgs {
    /// A trace dump written by `run --trace`.
    #[arg(long, conflicts_with_all = ["graph_file", "family"])]
    trace: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    #[arg(long, env = "ANB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Inspect(a) => cmd_inspect(a),
    };
    ExitCode::from(code)
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    USAGE
}

fn failed(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    FAILED
}

fn read_values(path: &Path) -> Result<Vec<ExactCount>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.trim()
                .parse::<ExactCount>()
                .map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))
        })
        .collect()
}

fn cmd_run(a: RunArgs) -> u8 {
    let (graph, topology) = match a.graph.build() {
        Ok(g) => g,
        Err(e) => return usage(e),
    };
    if !(a.nmax_slack >= 1.0 && a.nmax_slack.is_finite()) {
        return usage("--nmax-slack must be a finite number >= 1");
    }
    let algorithm = a.algo.algorithm();
    if (a.verify || a.trace.is_some()) && algorithm != Algorithm::Anb {
        return usage("--verify and --trace apply to --algo anb only");
    }
    let mode = match (a.mode, &a.values) {
        (ModeArg::Count, None) => Mode::Count,
        (ModeArg::Count, Some(_)) => return usage("--values needs --mode sum"),
        (ModeArg::Sum, None) => return usage("--mode sum needs --values"),
        (ModeArg::Sum, Some(p)) => match read_values(p) {
            Ok(v) if v.len() == graph.n() => Mode::Sum(v),
            Ok(v) => return usage(format!("{} values for {} nodes", v.len(), graph.n())),
            Err(e) => return usage(e),
        },
    };
    let diameter = graph.diameter();
    let n = graph.n();
    let mut config = SimConfig::new(graph, algorithm);
    config.n_max = ((n as f64 * a.nmax_slack).ceil() as usize).max(n);
    config.mode = mode;
    config.early_stop = !a.no_early_stop;
    config.trace_level = if a.verify || a.trace.is_some() {
        TraceLevel::Full
    } else {
        TraceLevel::Metrics
    };
    if a.inject_fault {
        config.fault = Some(FaultInjection::DoubleCountPayloads);
    }
    let result = match run(&config) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let report = if a.verify {
        let trace = result.trace.as_ref().expect("full trace");
        Some(anb_core::oracle::check(trace, &config.graph))
    } else {
        None
    };

    println!("{}", result.metrics);
    let first = &result.final_counts[0];
    if result.final_counts.iter().all(|c| c == first) {
        println!("n_i={first}");
    } else {
        let all: Vec<String> = result
            .final_counts
            .iter()
            .map(ToString::to_string)
            .collect();
        println!("n_i={}", all.join(","));
    }
    if let Some(r) = &report {
        println!("{r}");
    }
    if let Some(path) = &a.trace {
        let mut text = result.trace.as_ref().expect("full trace").dump();
        if let Some(r) = &report {
            text.push_str("# oracle\n");
            text.push_str(&r.to_key_values());
        }
        if let Err(e) = fs::write(path, text) {
            return failed(format!("{}: {e}", path.display()));
        }
    }
    if let Some(path) = &a.csv {
        let text = format!(
            "{}\n{}\n",
            sweep::CSV_HEADER,
            sweep::csv_line(&topology, a.graph.seed, diameter, &result.metrics)
        );
        if let Err(e) = sweep::write_atomic(path, &text) {
            return failed(e);
        }
    }
    if !result.correct() {
        return failed("not every node computed the expected total");
    }
    if let Some(f) = report.as_ref().and_then(|r| r.first_failure()) {
        return failed(format!("invariant check failed: {f}"));
    }
    0
}

fn cmd_sweep(a: SweepArgs) -> u8 {
    let mut spec = SweepSpec {
        base_seed: a.seed,
        nmax_slack: a.nmax_slack,
        early_stop: !a.no_early_stop,
        ..SweepSpec::default()
    };
    if !a.families.is_empty() {
        spec.families = a.families.iter().map(|f| f.family()).collect();
    }
    if !a.sizes.is_empty() {
        spec.sizes = a.sizes;
    }
    if !a.algos.is_empty() {
        spec.algorithms = a.algos.iter().map(|x| x.algorithm()).collect();
    }
    spec.repeats = match (a.repeats, a.paper_scale) {
        (Some(r), _) => r,
        (None, true) => sweep::PAPER_REPEATS,
        (None, false) => sweep::DEFAULT_REPEATS,
    };
    if let Err(e) = spec.validate() {
        return usage(e);
    }
    let rows = match sweep::run_sweep(&spec) {
        Ok(r) => r,
        Err(e) => return failed(e),
    };
    let agg = sweep::aggregate(&rows);
    let agg_path = sweep::aggregate_path(&a.csv);
    if let Err(e) = sweep::write_atomic(&a.csv, &sweep::rows_csv(&rows)) {
        return failed(e);
    }
    if let Err(e) = sweep::write_atomic(&agg_path, &sweep::aggregate_csv(&agg)) {
        let _ = fs::remove_file(&a.csv);
        return failed(e);
    }
    print!("{}", sweep::aggregate_csv(&agg));
    let bad = rows.iter().filter(|r| !r.metrics.correct).count();
    if bad > 0 {
        return failed(format!(
            "{bad} of {} runs computed a wrong total",
            rows.len()
        ));
    }
    0
}

fn cmd_verify(a: VerifyArgs) -> u8 {
    let corpus = verification_corpus(a.n_cap);
    let mut failures = 0;
    for entry in &corpus {
        let graph = match entry.graph() {
            Ok(g) => g,
            Err(e) => return failed(format!("{}: {e}", entry.label())),
        };
        let mut config = SimConfig::new(graph, Algorithm::Anb).with_trace(TraceLevel::Full);
        if a.inject_fault {
            config.fault = Some(FaultInjection::DoubleCountPayloads);
        }
        match anb_core::run_with_oracle(&config) {
            Ok((r, report)) if r.correct() => println!(
                "ok    {} t_reduction={} t_converged={} r={} within_3n={}",
                entry.label(),
                report.t_reduction.unwrap_or(0),
                report.t_converged.unwrap_or(0),
                r.residue_ids.len(),
                report.active_zero_within_3n()
            ),
            Ok(_) => {
                failures += 1;
                println!("FAIL  {} incorrect final count", entry.label());
            }
            Err(SimError::Oracle(report)) => {
                failures += 1;
                let f = report.first_failure().expect("failed report");
                println!("FAIL  {} {f}", entry.label());
            }
            Err(e) => {
                failures += 1;
                println!("FAIL  {} {e}", entry.label());
            }
        }
    }
    println!("{} graphs, {failures} failed", corpus.len());
    if failures > 0 {
        FAILED
    } else {
        0
    }
}

fn cmd_inspect(a: InspectArgs) -> u8 {
    if let Some(path) = &a.trace {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return usage(format!("{}: {e}", path.display())),
        };
        let records = match parse_dump(&text) {
            Ok(r) => r,
            Err(e) => return usage(e),
        };
        let last = records.iter().map(|r| r.round).max().unwrap_or(0);
        println!("round\tA\tL\tR\tI\tenvelopes");
        for t in 0..=last {
            let mut counts = [0usize; 4];
            let mut env = 0;
            for r in records.iter().filter(|r| r.round == t) {
                counts[r.state as usize] += 1;
                env += r.emitted.len();
            }
            println!(
                "{t}\t{}\t{}\t{}\t{}\t{env}",
                counts[0], counts[1], counts[2], counts[3]
            );
        }
        if let Some((_, oracle)) = text.split_once("# oracle\n") {
            print!("{oracle}");
        }
        return 0;
    }
    let g = GraphArgs {
        family: a.family,
        n: a.n,
        seed: a.seed,
        graph_file: a.graph_file,
    };
    if g.family.is_none() && g.graph_file.is_none() {
        return usage("inspect needs --trace, --graph-file or --family with --n");
    }
    match g.build() {
        Ok((graph, topology)) => {
            println!("topology   {topology}");
            println!("nodes      {}", graph.n());
            println!("edges      {}", graph.edge_count());
            println!("avg degree {}", graph.average_degree());
            println!("max degree {}", graph.max_degree());
            println!("diameter   {}", graph.diameter());
            0
        }
        Err(e) => usage(e),
    }
}
