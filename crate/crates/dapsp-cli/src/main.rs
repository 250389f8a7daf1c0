//! `dapsp` binary: generate deletion traces, replay them through the
//! shortest-path structures with oracle verification, and benchmark.
//!
//! Exit codes: 0 on success, 1 when verification finds a mismatch,
//! 2 for usage problems.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dapsp_cli::adversary::AdversaryKind;
use dapsp_cli::run::{run_trace, RunConfig, StructureKind};
use dapsp_cli::trace::DeletionTrace;
use dapsp_cli::{gen, CliError};

#[derive(Parser)]
#[command(
    name = "dapsp",
    version,
    about = "decremental shortest-path workbench",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a deletion trace.
    Gen(GenArgs),
    /// Replay a trace through a structure, verifying against an oracle.
    Run(RunArgs),
    /// Replay with a full oracle check after every deletion.
    Verify(VerifyArgs),
    /// Replay without verification and report wall times.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKindArg {
    /// Path plus two-step skips, skips deleted in order.
    #[value(name = "lower_bound")]
    LowerBound,
    /// Uniform directed graph, full shuffled deletion.
    Random,
    /// Complete layered DAG, full shuffled deletion.
    Layered,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StructureArg {
    Exact,
    #[value(name = "approx_det")]
    ApproxDet,
    #[value(name = "approx_rand")]
    ApproxRand,
    #[value(name = "es_baseline")]
    EsBaseline,
}

impl From<StructureArg> for StructureKind {
    fn from(a: StructureArg) -> StructureKind {
        match a {
            StructureArg::Exact => StructureKind::Exact,
            StructureArg::ApproxDet => StructureKind::ApproxDet,
            StructureArg::ApproxRand => StructureKind::ApproxRand,
            StructureArg::EsBaseline => StructureKind::EsBaseline,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AdversaryArg {
    Random,
    #[value(name = "greedy_pair")]
    GreedyPair,
    #[value(name = "path_cutter")]
    PathCutter,
}

impl From<AdversaryArg> for AdversaryKind {
    fn from(a: AdversaryArg) -> AdversaryKind {
        match a {
            AdversaryArg::Random => AdversaryKind::Random,
            AdversaryArg::GreedyPair => AdversaryKind::GreedyPair,
            AdversaryArg::PathCutter => AdversaryKind::PathCutter,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKindArg,
    /// Vertex count (lower_bound needs odd, random any >= 2).
    #[arg(long)]
    n: Option<u32>,
    /// Edge count (random only).
    #[arg(long)]
    m: Option<u64>,
    /// Extra edges prepended to lower_bound and deleted first.
    #[arg(long, default_value_t = 0)]
    densify: u32,
    /// Layer count (layered only).
    #[arg(long)]
    layers: Option<u32>,
    /// Vertices per layer (layered only).
    #[arg(long)]
    width: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Insert a full-matrix query after every this many deletions.
    #[arg(long, default_value_t = 0)]
    qa_every: u32,
    /// Destination file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_enum, default_value_t = StructureArg::Exact)]
    structure: StructureArg,
    /// Approximation parameter for approx_det and approx_rand.
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Coin seed for approx_rand and for adversaries.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Full-matrix check cadence in deletions; 0 picks it from n.
    #[arg(long, default_value_t = 0)]
    verify_stride: u32,
    /// Skip verification entirely.
    #[arg(long)]
    no_verify: bool,
    /// Generate deletions online instead of replaying the trace's.
    #[arg(long, value_enum)]
    adversary: Option<AdversaryArg>,
    /// Deletion budget; omitted means play to the end.
    #[arg(long)]
    steps: Option<u64>,
    /// Target pair for path_cutter, written "u,v".
    #[arg(long, value_parser = parse_pair)]
    pair: Option<(u32, u32)>,
    /// Tree/scale boundary override.
    #[arg(long)]
    cutoff: Option<u64>,
    /// Sampling probability override (approx_rand).
    #[arg(long)]
    rand_p: Option<f64>,
    /// Scale subdivision override (approx_rand).
    #[arg(long)]
    rand_d: Option<u32>,
    /// Keep path certificates in approx_det.
    #[arg(long)]
    paths: bool,
    /// Report wall times (documents stop being byte-reproducible).
    #[arg(long)]
    timings: bool,
    /// Corrupt answers from this clock on; exercises failure reporting.
    #[arg(long)]
    inject_fault: Option<u64>,
    /// Metrics destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_enum, default_value_t = StructureArg::Exact)]
    structure: StructureArg,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    cutoff: Option<u64>,
    #[arg(long)]
    rand_p: Option<f64>,
    #[arg(long)]
    rand_d: Option<u32>,
    #[arg(long)]
    paths: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Structure to time; repeat the flag to compare several.
    #[arg(long, value_enum, required = true)]
    structure: Vec<StructureArg>,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    cutoff: Option<u64>,
    #[arg(long)]
    rand_p: Option<f64>,
    #[arg(long)]
    rand_d: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"u,v\", got {s:?}"))?;
    let u = a.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let v = b.trim().parse::<u32>().map_err(|e| e.to_string())?;
    Ok((u, v))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_trace(path: &PathBuf) -> Result<DeletionTrace, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(DeletionTrace::parse(&text)?)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Gen(a) => {
            let need = |name: &str, v: Option<u32>| {
                v.ok_or_else(|| CliError::Usage(format!("this family needs --{name}")))
            };
            let t = match a.kind {
                GenKindArg::LowerBound => {
                    gen::lower_bound(need("n", a.n)?, a.densify, a.seed, a.qa_every)?
                }
                GenKindArg::Random => {
                    let m = a
                        .m
                        .ok_or_else(|| CliError::Usage("this family needs --m".into()))?;
                    gen::random(need("n", a.n)?, m, a.seed, a.qa_every)?
                }
                GenKindArg::Layered => gen::layered(
                    need("layers", a.layers)?,
                    need("width", a.width)?,
                    a.seed,
                    a.qa_every,
                )?,
            };
            emit(a.out.as_ref(), &t.serialize())
        }
        Cmd::Run(a) => {
            let trace = load_trace(&a.trace)?;
            let cfg = RunConfig {
                structure: a.structure.into(),
                eps: a.eps,
                seed: a.seed,
                verify: if a.no_verify { None } else { Some(a.verify_stride) },
                adversary: a.adversary.map(Into::into),
                max_steps: a.steps,
                pair: a.pair,
                cutoff: a.cutoff,
                rand_p: a.rand_p,
                rand_subdivisions: a.rand_d,
                det_paths: a.paths,
                timings: a.timings,
                inject_fault: a.inject_fault,
            };
            let report = run_trace(&trace, &cfg)?;
            emit(a.out.as_ref(), &report.doc.render())?;
            report.verdict_err()
        }
        Cmd::Verify(a) => {
            let trace = load_trace(&a.trace)?;
            let cfg = RunConfig {
                structure: a.structure.into(),
                eps: a.eps,
                seed: a.seed,
                verify: Some(1),
                cutoff: a.cutoff,
                rand_p: a.rand_p,
                rand_subdivisions: a.rand_d,
                det_paths: a.paths,
                ..RunConfig::default()
            };
            let report = run_trace(&trace, &cfg)?;
            emit(a.out.as_ref(), &report.doc.render())?;
            if report.failure.is_none() {
                eprintln!(
                    "verify: pass ({} checks, max stretch {})",
                    report.doc.get("verify.checks").unwrap_or("0"),
                    report.doc.get("verify.max_stretch").unwrap_or("1"),
                );
            }
            report.verdict_err()
        }
        Cmd::Bench(a) => {
            let trace = load_trace(&a.trace)?;
            let mut out = String::new();
            for (i, &st) in a.structure.iter().enumerate() {
                let cfg = RunConfig {
                    structure: st.into(),
                    eps: a.eps,
                    seed: a.seed,
                    verify: None,
                    cutoff: a.cutoff,
                    rand_p: a.rand_p,
                    rand_subdivisions: a.rand_d,
                    timings: true,
                    ..RunConfig::default()
                };
                let report = run_trace(&trace, &cfg)?;
                if i > 0 {
                    out.push('\n');
                }
                out.push_str(&report.doc.render());
            }
            emit(a.out.as_ref(), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
