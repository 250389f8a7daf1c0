//! Trace replay: build a structure over the trace's initial graph,
//! feed it deletions (from the trace or from an online adversary),
//! cross-check answers against a brute-force oracle, and assemble the
//! metrics report.

use std::time::Instant;

use dapsp::approx::{DetApsp, DetOptions};
use dapsp::es_tree::EsBaseline;
use dapsp::exact::ExactApsp;
use dapsp::graph::DecrementalGraph;
use dapsp::oracle;
use dapsp::randomized::{RandApsp, RandOptions};
use dapsp::{ApspStructure, Dist, VertexId, INF};

use crate::adversary::{Adversary, AdversaryKind, AdversaryStep, StopReason};
use crate::metrics::MetricsDoc;
use crate::trace::{DeletionTrace, TraceEvent};
use crate::{fmt_dist, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Exact,
    ApproxDet,
    ApproxRand,
    EsBaseline,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Exact => "exact",
            StructureKind::ApproxDet => "approx_det",
            StructureKind::ApproxRand => "approx_rand",
            StructureKind::EsBaseline => "es_baseline",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub structure: StructureKind,
    pub eps: f64,
    pub seed: u64,
    /// None turns verification off. Some(0) picks the stride from n,
    /// any other value checks the full matrix every that many
    /// deletions. A final full check always runs when verification is
    /// on, whatever the stride.
    pub verify: Option<u32>,
    pub adversary: Option<AdversaryKind>,
    /// Deletion budget; None plays to the end.
    pub max_steps: Option<u64>,
    /// Target pair for the path-cutting adversary.
    pub pair: Option<(u32, u32)>,
    pub cutoff: Option<Dist>,
    pub rand_p: Option<f64>,
    pub rand_subdivisions: Option<u32>,
    /// Keep path certificates in the deterministic structure.
    pub det_paths: bool,
    pub timings: bool,
    /// Fault hook: from this clock on, every finite nonzero answer the
    /// verifier or an event reads is off by one. Exists so the failure
    /// reporting path can be exercised against honest structures.
    pub inject_fault: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            structure: StructureKind::Exact,
            eps: 0.25,
            seed: 1,
            verify: Some(0),
            adversary: None,
            max_steps: None,
            pair: None,
            cutoff: None,
            rand_p: None,
            rand_subdivisions: None,
            det_paths: false,
            timings: false,
            inject_fault: None,
        }
    }
}

/// First mismatch found by verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Failure {
    pub clock: u64,
    pub u: u32,
    pub v: u32,
    pub got: Dist,
    pub want: Dist,
}

pub struct RunReport {
    pub doc: MetricsDoc,
    pub failure: Option<Failure>,
}

impl RunReport {
    pub fn verdict_err(&self) -> Result<(), CliError> {
        match self.failure {
            None => Ok(()),
            Some(f) => Err(CliError::Verification {
                clock: f.clock,
                u: f.u,
                v: f.v,
                got: f.got,
                want: f.want,
            }),
        }
    }
}

pub fn build_structure(
    trace: &DeletionTrace,
    cfg: &RunConfig,
) -> Result<Box<dyn ApspStructure>, CliError> {
    if trace.n < 2 {
        return Err(CliError::Usage(format!(
            "structures need at least 2 vertices, trace has {}",
            trace.n
        )));
    }
    let g = DecrementalGraph::from_edge_list(trace.n, &trace.edges)?;
    Ok(match cfg.structure {
        StructureKind::Exact => match cfg.cutoff {
            Some(c) => Box::new(ExactApsp::with_cutoff(g, c)?),
            None => Box::new(ExactApsp::init(g)),
        },
        StructureKind::ApproxDet => Box::new(DetApsp::with_options(
            g,
            cfg.eps,
            DetOptions {
                cutoff: cfg.cutoff,
                paths: cfg.det_paths,
            },
        )?),
        StructureKind::ApproxRand => Box::new(RandApsp::with_options(
            g,
            cfg.eps,
            cfg.seed,
            RandOptions {
                cutoff: cfg.cutoff,
                p: cfg.rand_p,
                subdivisions: cfg.rand_subdivisions,
            },
        )?),
        StructureKind::EsBaseline => Box::new(EsBaseline::new(trace.n, &trace.edges)?),
    })
}

/// What the run observes for one pair, fault hook included.
fn answer(s: &dyn ApspStructure, u: u32, v: u32, fault: bool) -> Dist {
    let d = s.query(VertexId(u), VertexId(v));
    if fault && d != INF && d > 0 {
        d + 1
    } else {
        d
    }
}

struct Verifier {
    /// None demands exact equality, Some(eps) the usual sandwich with
    /// a one-in-2^40 rounding allowance.
    eps: Option<f64>,
    checks: u64,
    max_stretch: f64,
}

impl Verifier {
    fn new(kind: StructureKind, eps: f64) -> Verifier {
        let eps = match kind {
            StructureKind::Exact | StructureKind::EsBaseline => None,
            StructureKind::ApproxDet | StructureKind::ApproxRand => Some(eps),
        };
        Verifier {
            eps,
            checks: 0,
            max_stretch: 1.0,
        }
    }

    fn admit(&mut self, got: Dist, want: Dist) -> bool {
        self.checks += 1;
        if want == INF || got == INF {
            return got == want;
        }
        if want > 0 {
            let ratio = got as f64 / want as f64;
            if ratio > self.max_stretch {
                self.max_stretch = ratio;
            }
        }
        match self.eps {
            None => got == want,
            Some(eps) => {
                got >= want && got as f64 <= (1.0 + eps) * (1.0 + 2f64.powi(-40)) * want as f64
            }
        }
    }

    fn check_pair(&mut self, s: &dyn ApspStructure, u: u32, v: u32, fault: bool) -> Option<Failure> {
        let dist = oracle::bfs_from(s.graph(), VertexId(u), true);
        let want = if dist[v as usize] == oracle::UNREACHED {
            INF
        } else {
            dist[v as usize] as Dist
        };
        let got = answer(s, u, v, fault);
        if self.admit(got, want) {
            None
        } else {
            Some(Failure {
                clock: s.graph().clock(),
                u,
                v,
                got,
                want,
            })
        }
    }

    fn check_matrix(&mut self, s: &dyn ApspStructure, fault: bool) -> Option<Failure> {
        let want = oracle::recompute(s.graph());
        let n = s.n();
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let w = want.get(VertexId(u), VertexId(v));
                let got = answer(s, u, v, fault);
                if !self.admit(got, w) {
                    return Some(Failure {
                        clock: s.graph().clock(),
                        u,
                        v,
                        got,
                        want: w,
                    });
                }
            }
        }
        None
    }
}

/// Replay `trace` under `cfg`. A verification mismatch is reported in
/// the returned document, not as an `Err`; errors mean the run could
/// not be set up or driven at all.
pub fn run_trace(trace: &DeletionTrace, cfg: &RunConfig) -> Result<RunReport, CliError> {
    trace.validate()?;
    let mut s = build_structure(trace, cfg)?;
    let mut adv = match cfg.adversary {
        Some(kind) => Some(Adversary::new(kind, cfg.seed, cfg.pair, &*s)?),
        None => None,
    };
    let stride = cfg.verify.map(|k| if k == 0 { auto_stride(trace.n) } else { k });
    let mut verifier = Verifier::new(cfg.structure, cfg.eps);

    let mut failure: Option<Failure> = None;
    let mut deletions: u64 = 0;
    let mut queries: u64 = 0;
    let mut query_alls: u64 = 0;
    let mut changes_reported: u64 = 0;
    let mut stop: Option<StopReason> = None;

    let mut event_ms: Vec<f64> = Vec::new();
    let started = Instant::now();

    let fault_on = |clock: u64| cfg.inject_fault.map_or(false, |c| clock >= c);

    // One deletion plus its stride check; shared by both drive modes.
    macro_rules! apply_delete {
        ($u:expr, $v:expr) => {{
            let t0 = cfg.timings.then(Instant::now);
            changes_reported += s.delete(VertexId($u), VertexId($v))?.len() as u64;
            deletions += 1;
            if let Some(t0) = t0 {
                event_ms.push(t0.elapsed().as_secs_f64() * 1e3);
            }
            if let Some(k) = stride {
                if deletions % k as u64 == 0 {
                    failure = verifier.check_matrix(&*s, fault_on(deletions));
                }
            }
        }};
    }

    if adv.is_some() {
        // Online mode: the trace supplies only the initial graph.
        loop {
            if failure.is_some() {
                break;
            }
            if cfg.max_steps.map_or(false, |cap| deletions >= cap) {
                break;
            }
            let step = adv.as_mut().unwrap().next(&*s);
            match step {
                Ok(AdversaryStep::Delete(u, v)) => apply_delete!(u.0, v.0),
                Ok(AdversaryStep::Stop(reason)) => {
                    stop = Some(reason);
                    break;
                }
                Err(CliError::Verification { clock, u, v, got, want }) => {
                    failure = Some(Failure { clock, u, v, got, want });
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    } else {
        for ev in &trace.events {
            if failure.is_some() {
                break;
            }
            if cfg.max_steps.map_or(false, |cap| deletions >= cap) {
                break;
            }
            match *ev {
                TraceEvent::Delete(u, v) => apply_delete!(u, v),
                TraceEvent::Query(u, v) => {
                    let got = answer(&*s, u, v, fault_on(deletions));
                    queries += 1;
                    if stride.is_some() {
                        if let Some(f) = verifier.check_pair(&*s, u, v, fault_on(deletions)) {
                            failure = Some(f);
                        }
                    }
                    let _ = got;
                }
                TraceEvent::QueryAll => {
                    query_alls += 1;
                    if stride.is_some() {
                        failure = verifier.check_matrix(&*s, fault_on(deletions));
                    }
                }
            }
        }
    }

    // The final state always gets a full check, even off-stride.
    if failure.is_none() && stride.is_some() {
        failure = verifier.check_matrix(&*s, fault_on(deletions));
    }

    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    let mut doc = MetricsDoc::new();
    doc.put("structure.name", s.name());
    doc.put("structure.n", s.n());
    match cfg.structure {
        StructureKind::ApproxDet | StructureKind::ApproxRand => {
            doc.put("structure.eps", cfg.eps);
        }
        _ => {}
    }
    if cfg.structure == StructureKind::ApproxRand {
        doc.put("structure.seed", cfg.seed);
    }
    if let Some(c) = cfg.cutoff {
        doc.put("structure.cutoff", c);
    }
    doc.put("trace.n", trace.n);
    doc.put("trace.m", trace.edges.len());
    doc.put("trace.events", trace.events.len());
    if let Some(a) = cfg.adversary {
        doc.put("adversary.kind", a.name());
        doc.put("adversary.steps", deletions);
        if let Some(reason) = stop {
            doc.put("adversary.stop", reason.name());
        }
    }
    doc.put("run.deletions", deletions);
    doc.put("run.queries", queries);
    doc.put("run.query_alls", query_alls);
    doc.put("run.changes_reported", changes_reported);
    doc.put("run.final_m", s.graph().m());
    let c = s.counters();
    doc.put("counters.es_scan_steps", c.es_scan_steps);
    doc.put("counters.queue_ops", c.queue_ops);
    doc.put("counters.sep_budget_units", c.sep_budget_units);
    doc.put("counters.sep_members_added", c.sep_members_added);
    doc.put("counters.sep_triggers", c.sep_triggers);
    doc.put("counters.in_tree_edges", c.in_tree_edges);
    doc.put("counters.matrix_changes", c.matrix_changes);
    match stride {
        None => doc.put("verify.verdict", "off"),
        Some(k) => {
            doc.put("verify.stride", k);
            doc.put("verify.checks", verifier.checks);
            doc.put("verify.max_stretch", verifier.max_stretch);
            doc.put("verify.verdict", if failure.is_none() { "pass" } else { "fail" });
        }
    }
    if let Some(f) = failure {
        doc.put("verify.failure.clock", f.clock);
        doc.put("verify.failure.u", f.u);
        doc.put("verify.failure.v", f.v);
        doc.put("verify.failure.got", fmt_dist(f.got));
        doc.put("verify.failure.want", fmt_dist(f.want));
    }
    if cfg.timings {
        doc.put("timings.total_ms", format!("{total_ms:.3}"));
        doc.put("timings.events", event_ms.len());
        let (mut mean, mut max) = (0.0f64, 0.0f64);
        if !event_ms.is_empty() {
            mean = event_ms.iter().sum::<f64>() / event_ms.len() as f64;
            max = event_ms.iter().cloned().fold(0.0, f64::max);
        }
        doc.put("timings.mean_event_ms", format!("{mean:.3}"));
        doc.put("timings.max_event_ms", format!("{max:.3}"));
    }

    Ok(RunReport { doc, failure })
}

/// Full-matrix checks cost an oracle recompute each; on bigger graphs
/// every fourth deletion keeps replays affordable while still pinning
/// the whole run down (the final state is always checked).
fn auto_stride(n: u32) -> u32 {
    if n <= 120 {
        1
    } else {
        4
    }
}
