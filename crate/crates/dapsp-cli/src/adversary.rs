//! Online deletion strategies. Each one watches the structure's own
//! answers, so a run against an adversary probes exactly the adaptive
//! setting the structures claim to survive: the next deletion may
//! depend on everything the structure has revealed so far.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::VecDeque;

use dapsp::graph::DecrementalGraph;
use dapsp::{ApspStructure, VertexId, INF};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    /// Uniformly random surviving edge. Oblivious; the baseline threat.
    Random,
    /// Finds the ordered pair with the largest finite reported estimate
    /// and cuts the first edge of a true shortest path between them.
    GreedyPair,
    /// Keeps querying one fixed pair and cuts the first surviving edge
    /// of whatever path the structure reports for it.
    PathCutter,
}

impl AdversaryKind {
    pub fn name(self) -> &'static str {
        match self {
            AdversaryKind::Random => "random",
            AdversaryKind::GreedyPair => "greedy_pair",
            AdversaryKind::PathCutter => "path_cutter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    NoEdgesLeft,
    PairDisconnected,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::NoEdgesLeft => "no_edges_left",
            StopReason::PairDisconnected => "pair_disconnected",
        }
    }
}

pub enum AdversaryStep {
    Delete(VertexId, VertexId),
    Stop(StopReason),
}

pub struct Adversary {
    kind: AdversaryKind,
    rng: ChaCha12Rng,
    pair: (VertexId, VertexId),
}

/// Shortest path by plain BFS over the current graph, for the
/// computationally unbounded strategies. Ties break along adjacency
/// order, which is itself deterministic.
fn bfs_path(g: &DecrementalGraph, s: VertexId, t: VertexId) -> Option<Vec<u32>> {
    let n = g.n() as usize;
    let mut parent: Vec<u32> = vec![u32::MAX; n];
    parent[s.idx()] = s.0;
    let mut queue = VecDeque::new();
    queue.push_back(s.0);
    while let Some(x) = queue.pop_front() {
        if x == t.0 {
            let mut path = vec![t.0];
            let mut cur = t.0;
            while cur != s.0 {
                cur = parent[cur as usize];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &y in g.out_neighbors(VertexId(x)) {
            if parent[y as usize] == u32::MAX {
                parent[y as usize] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

impl Adversary {
    /// Check structure support and fix the target pair up front, so a
    /// bad combination fails before any deletion happens.
    pub fn new(
        kind: AdversaryKind,
        seed: u64,
        pair: Option<(u32, u32)>,
        s: &dyn ApspStructure,
    ) -> Result<Adversary, CliError> {
        let n = s.n();
        let (u, v) = pair.unwrap_or((0, n - 1));
        if u >= n || v >= n || u == v {
            return Err(CliError::Usage(format!(
                "target pair ({u}, {v}) is not an ordered pair of distinct vertices below {n}"
            )));
        }
        if kind == AdversaryKind::PathCutter && !s.supports_paths() {
            return Err(CliError::Usage(format!(
                "path_cutter needs a structure that reports paths; {} does not",
                s.name()
            )));
        }
        Ok(Adversary {
            kind,
            rng: ChaCha12Rng::seed_from_u64(seed),
            pair: (VertexId(u), VertexId(v)),
        })
    }

    pub fn target_pair(&self) -> (VertexId, VertexId) {
        self.pair
    }

    /// Pick the next edge to delete, or explain why the run is over.
    /// The borrowed structure is only queried, never mutated; the
    /// caller applies the returned deletion.
    pub fn next(&mut self, s: &dyn ApspStructure) -> Result<AdversaryStep, CliError> {
        match self.kind {
            AdversaryKind::Random => {
                let edges: Vec<(u32, u32)> = s.graph().edges().collect();
                if edges.is_empty() {
                    return Ok(AdversaryStep::Stop(StopReason::NoEdgesLeft));
                }
                let (u, v) = edges[self.rng.gen_range(0..edges.len())];
                Ok(AdversaryStep::Delete(VertexId(u), VertexId(v)))
            }
            AdversaryKind::GreedyPair => self.greedy(s),
            AdversaryKind::PathCutter => self.cut_path(s),
        }
    }

    fn greedy(&mut self, s: &dyn ApspStructure) -> Result<AdversaryStep, CliError> {
        let n = s.n();
        let mut best: Option<(u64, VertexId, VertexId)> = None;
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let est = s.query(VertexId(u), VertexId(v));
                if est == INF {
                    continue;
                }
                // Strict improvement keeps the smallest pair on ties.
                if best.map_or(true, |(b, _, _)| est > b) {
                    best = Some((est, VertexId(u), VertexId(v)));
                }
            }
        }
        let Some((est, u, v)) = best else {
            // Any surviving edge would make its own endpoints a finite
            // pair, so no finite estimate means the graph is empty.
            return Ok(AdversaryStep::Stop(StopReason::NoEdgesLeft));
        };
        let Some(path) = bfs_path(s.graph(), u, v) else {
            return Err(CliError::Verification {
                clock: s.graph().clock(),
                u: u.0,
                v: v.0,
                got: est,
                want: INF,
            });
        };
        Ok(AdversaryStep::Delete(VertexId(path[0]), VertexId(path[1])))
    }

    fn cut_path(&mut self, s: &dyn ApspStructure) -> Result<AdversaryStep, CliError> {
        let (u, v) = self.pair;
        let est = s.query(u, v);
        if est == INF {
            return Ok(AdversaryStep::Stop(StopReason::PairDisconnected));
        }
        let path = s.report_path(u, v).unwrap_or_default();
        for w in path.windows(2) {
            if s.graph().has_edge(w[0], w[1]) {
                return Ok(AdversaryStep::Delete(w[0], w[1]));
            }
        }
        // A finite answer with no usable certificate is a broken
        // structure, not a finished run.
        let want = dapsp::oracle::bfs_from(s.graph(), u, true)[v.idx()];
        Err(CliError::Verification {
            clock: s.graph().clock(),
            u: u.0,
            v: v.0,
            got: est,
            want: if want == dapsp::oracle::UNREACHED {
                INF
            } else {
                want as u64
            },
        })
    }
}
