//! Deterministic (1+eps)-approximate distances under edge deletions.
//!
//! Same bottom-up slot chain as the exact structure, with one change:
//! instead of a priority queue per frozen snapshot, each pair keeps a
//! shared member list and a counter per sub-scale. Counter j tracks how
//! many members still have a two-hop key within the j-th rounded
//! threshold, and the pair's value at the scale is the smallest rounded
//! threshold whose counter is alive. Estimates therefore move along a
//! fixed grid of threshold values, which is where the stretch comes from
//! and why a deletion costs counter updates instead of heap operations.
//!
//! Below the hybrid cutoff distance every answer comes from plain
//! bounded-depth trees and is exact; the tree bank is sized so that it
//! reaches the first maintained scale's crossing value.

use std::collections::HashMap;

use crate::graph::DecrementalGraph;
use crate::levels::{BaseMatrix, LegChange, PairGrid, SepBank, TouchSet, WitnessIndex};
use crate::scales::{ScaleLadder, Variant};
use crate::{dist_add, ApspStructure, Counters, Dist, DistChange, Error, Result, VertexId, INF};

/// One snapshot member and its current two-hop key. Keys only rise; a
/// member whose key has passed the last sub-scale threshold is dead and
/// is skipped from then on.
struct Member {
    s: u32,
    key: Dist,
}

/// Counting queues of one pair at one scale. `counts[j]` is the number of
/// members with key within sub-scale threshold j; it only decreases. The
/// member list is frozen at snapshot time and doubles as the support for
/// path decoding, so reporting costs no extra memory here.
struct PairCounter {
    members: Vec<Member>,
    counts: Vec<u32>,
}

/// Where a leg change must be replayed: member `idx` of the counter owned
/// by pair (u, v) at the same scale.
struct BumpTarget {
    u: u32,
    v: u32,
    idx: u32,
}

/// Construction knobs. The cutoff override replaces the hybrid threshold
/// formula, which on small graphs clamps high enough that no scale ever
/// activates; lowering it forces answers through the counting queues.
#[derive(Clone, Copy, Default)]
pub struct DetOptions {
    pub cutoff: Option<Dist>,
    pub paths: bool,
}

pub struct DetApsp {
    g: DecrementalGraph,
    eps: f64,
    ladder: ScaleLadder,
    base: BaseMatrix,
    d_threshold: Dist,
    /// First maintained scale; slot k serves scale i_lo + k - 1.
    i_lo: u32,
    nlevels: usize,
    slots: Vec<PairGrid>,
    queues: Vec<HashMap<(u32, u32), PairCounter>>,
    windex: Vec<WitnessIndex<BumpTarget>>,
    seps: SepBank,
    /// Per pair: how many scales it has crossed. Crossings are a prefix
    /// of the scale range, so one count suffices.
    crossed: Vec<u32>,
    touched: TouchSet,
    paths: bool,
    queue_ops: u64,
    matrix_changes: u64,
}

/// Prefix estimate of slot `k` (0 = tree base) for the ordered pair.
#[inline]
fn prefix(base: &BaseMatrix, slots: &[PairGrid], k: usize, a: u32, b: u32) -> Dist {
    if k == 0 {
        base.query(a, b)
    } else {
        slots[k - 1].get(a, b)
    }
}

/// Hybrid tree/scale boundary: n lg²n / (eps √m), raised to the separator
/// floor and capped at n. The lower clamp applies first so that the cap
/// wins when the two collide, which is the whole small-graph regime.
fn hybrid_threshold(n: u32, m: usize, eps: f64) -> Dist {
    let nf = n as f64;
    let lg = nf.log2();
    let raw = if m == 0 {
        f64::INFINITY
    } else {
        (nf * lg * lg / (eps * (m as f64).sqrt())).ceil()
    };
    let lo = (33.0 * lg).ceil();
    raw.max(lo).min(nf) as Dist
}

impl DetApsp {
    /// Build over the current graph with the hybrid threshold formula.
    ///
    /// Panics if n < 2; a one-vertex graph has no pairs to maintain.
    pub fn init(g: DecrementalGraph, eps: f64) -> Result<DetApsp> {
        Self::with_options(g, eps, DetOptions::default())
    }

    pub fn with_options(g: DecrementalGraph, eps: f64, opts: DetOptions) -> Result<DetApsp> {
        let n = g.n();
        let ladder = ScaleLadder::build(n, eps, Variant::ApproxDet)?;
        let d_threshold = match opts.cutoff {
            Some(c) if c < 34 => {
                return Err(Error::BadParams(format!(
                    "scale cutoff {c} below the separator minimum of 34"
                )));
            }
            Some(c) => c,
            None => hybrid_threshold(n, g.m(), eps),
        };
        let (i_lo, nlevels) = match ladder.first_level_at(d_threshold) {
            Some(i) => (i, (ladder.i_max() - i + 1) as usize),
            None => (0, 0),
        };
        // Trees must answer exactly up to the first scale's crossing
        // value, or pairs between the tree horizon and the crossing
        // would read infinity with no queue to fall back on.
        let base_depth = if nlevels > 0 {
            ladder.det_crossing(i_lo)
        } else {
            (n - 1).max(1) as Dist
        };
        let base = BaseMatrix::build(&g, base_depth);
        let mut a = DetApsp {
            eps,
            ladder,
            base,
            d_threshold,
            i_lo,
            nlevels,
            slots: (0..nlevels).map(|_| PairGrid::new(n, INF)).collect(),
            queues: (0..nlevels).map(|_| HashMap::new()).collect(),
            windex: (0..nlevels).map(|_| WitnessIndex::new()).collect(),
            seps: SepBank::new(nlevels, n),
            crossed: vec![0; n as usize * n as usize],
            touched: TouchSet::new(n),
            paths: opts.paths,
            queue_ops: 0,
            matrix_changes: 0,
            g,
        };
        let mut f0 = Vec::with_capacity(n as usize * (n as usize - 1));
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    f0.push((u, v, 0, a.base.query(u, v)));
                }
            }
        }
        a.cascade(f0, true)?;
        Ok(a)
    }

    pub fn ladder(&self) -> &ScaleLadder {
        &self.ladder
    }

    pub fn d_threshold(&self) -> Dist {
        self.d_threshold
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn cascade(&mut self, mut f: Vec<LegChange>, fresh: bool) -> Result<Vec<LegChange>> {
        for k in 1..=self.nlevels {
            f = self.run_level(k, &f, fresh)?;
        }
        Ok(f)
    }

    /// Apply the previous slot's changes to scale `i_lo + k - 1`. Stages
    /// mirror the exact structure: grow separators, freeze snapshots for
    /// pairs that crossed, replay leg changes into the counters, then
    /// refresh the running minima.
    fn run_level(&mut self, k: usize, f_in: &[LegChange], fresh: bool) -> Result<Vec<LegChange>> {
        let i = self.i_lo + k as u32 - 1;
        let trig = self.ladder.trigger_floor(i);
        let cross = self.ladder.det_crossing(i);
        let d_sep = self.ladder.floor_d(i);
        let windows = self.ladder.sep_windows(i);
        let c = self.ladder.c() as usize;
        let thr: Vec<Dist> = (0..c)
            .map(|j| self.ladder.det_queue_threshold(i, j as u32))
            .collect();
        let thr_max = thr[c - 1];
        let n = self.g.n() as usize;
        self.touched.begin();

        for &(a, b, old, new) in f_in {
            if old <= trig && trig < new {
                self.seps.trigger(&self.g, k - 1, a, b, d_sep, windows)?;
            }
        }

        let DetApsp {
            base,
            slots,
            queues,
            windex,
            seps,
            crossed,
            touched,
            queue_ops,
            ..
        } = self;
        let (lower, upper) = slots.split_at_mut(k - 1);
        let slot = &mut upper[0];
        let read = |a: u32, b: u32| prefix(base, lower, k - 1, a, b);

        // Freeze snapshots for pairs that just crossed this scale's line.
        // Members already past the last threshold can never count, so
        // they are dropped at birth rather than carried dead.
        for &(a, b, old, new) in f_in {
            if old <= cross && cross < new {
                debug_assert_eq!(crossed[a as usize * n + b as usize], k as u32 - 1);
                crossed[a as usize * n + b as usize] = k as u32;
                let cut = seps.cut_now(k - 1, a);
                let mut members = Vec::new();
                let mut counts = vec![0u32; c];
                for &s in seps.members_at(k - 1, a, cut) {
                    let key = dist_add(read(a, s), read(s, b));
                    if key > thr_max {
                        continue;
                    }
                    let idx = members.len() as u32;
                    members.push(Member { s, key });
                    windex[k - 1].register(a, s, BumpTarget { u: a, v: b, idx });
                    windex[k - 1].register(s, b, BumpTarget { u: a, v: b, idx });
                    for (j, &t) in thr.iter().enumerate() {
                        if key <= t {
                            counts[j] += 1;
                        }
                    }
                }
                if !members.is_empty() {
                    *queue_ops += members.len() as u64;
                    queues[k - 1].insert((a, b), PairCounter { members, counts });
                }
                touched.add(a, b);
            }
        }

        // Replay leg changes. Recomputing from the current lower slots is
        // idempotent, so a member hit through both legs settles once; the
        // counters drop one unit per threshold the key stepped over.
        for &(a, b, _, _) in f_in {
            for t in windex[k - 1].entries(a, b) {
                let pc = queues[k - 1].get_mut(&(t.u, t.v)).expect("indexed counter");
                let mem = &mut pc.members[t.idx as usize];
                if mem.key > thr_max {
                    continue;
                }
                let new_key = dist_add(read(t.u, mem.s), read(mem.s, t.v));
                if new_key <= mem.key {
                    continue;
                }
                for (j, &t_j) in thr.iter().enumerate() {
                    if mem.key <= t_j && t_j < new_key {
                        pc.counts[j] -= 1;
                    }
                }
                mem.key = new_key;
                *queue_ops += 1;
                touched.add(t.u, t.v);
            }
        }

        for &(a, b, _, _) in f_in {
            touched.add(a, b);
        }
        let mut f_out = Vec::with_capacity(touched.sorted().len());
        for &(a, b) in touched.sorted() {
            let level_val = queues[k - 1].get(&(a, b)).map_or(INF, |pc| {
                pc.counts
                    .iter()
                    .position(|&cnt| cnt > 0)
                    .map_or(INF, |j| thr[j])
            });
            let new = read(a, b).min(level_val);
            let cur = slot.get(a, b);
            if fresh {
                slot.set(a, b, new);
                f_out.push((a, b, 0, new));
            } else {
                debug_assert!(new >= cur, "slot estimates move up only");
                if new > cur {
                    slot.set(a, b, new);
                    f_out.push((a, b, cur, new));
                }
            }
        }

        #[cfg(debug_assertions)]
        self.check_slot(k);

        Ok(f_out)
    }

    /// Full-sweep slot audit: every pair equals the minimum of the slot
    /// below and its first alive threshold, and every counter equals a
    /// recount of its members against freshly recomputed keys.
    #[cfg(debug_assertions)]
    fn check_slot(&self, k: usize) {
        let i = self.i_lo + k as u32 - 1;
        let c = self.ladder.c() as usize;
        let thr: Vec<Dist> = (0..c)
            .map(|j| self.ladder.det_queue_threshold(i, j as u32))
            .collect();
        let level_of = |pc: &PairCounter| {
            pc.counts
                .iter()
                .position(|&cnt| cnt > 0)
                .map_or(INF, |j| thr[j])
        };
        let n = self.g.n();
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let level_val = self.queues[k - 1].get(&(a, b)).map_or(INF, &level_of);
                let want = prefix(&self.base, &self.slots, k - 1, a, b).min(level_val);
                assert_eq!(
                    self.slots[k - 1].get(a, b),
                    want,
                    "slot {k} out of sync at ({a}, {b})"
                );
            }
        }
        for (&(a, b), pc) in &self.queues[k - 1] {
            for (j, &t) in thr.iter().enumerate() {
                let recount = pc
                    .members
                    .iter()
                    .filter(|m| {
                        let key = dist_add(
                            prefix(&self.base, &self.slots, k - 1, a, m.s),
                            prefix(&self.base, &self.slots, k - 1, m.s, b),
                        );
                        key <= t
                    })
                    .count() as u32;
                assert_eq!(
                    pc.counts[j], recount,
                    "counter ({a}, {b}) sub-scale {j} drifted from its members"
                );
            }
        }
    }

    /// Append the vertices of a certified a-to-b walk, including `a` and
    /// excluding `b`. The first slot that realizes the answer holds a
    /// live member whose two legs sum to at most the answer, so the
    /// recursion never lengthens the walk past the estimate.
    fn decode(&self, a: u32, b: u32, out: &mut Vec<VertexId>) {
        let d = prefix(&self.base, &self.slots, self.nlevels, a, b);
        debug_assert!(d < INF);
        if self.base.query(a, b) == d {
            let walk = self
                .base
                .tree(a)
                .path(&self.g, VertexId(b))
                .expect("finite base answer decodes");
            out.extend_from_slice(&walk[..walk.len() - 1]);
            return;
        }
        let mut k = 1;
        while prefix(&self.base, &self.slots, k, a, b) != d {
            k += 1;
            debug_assert!(k <= self.nlevels, "answer must surface in some slot");
        }
        let mem = self.queues[k - 1]
            .get(&(a, b))
            .and_then(|pc| pc.members.iter().find(|m| m.key <= d))
            .expect("first realizing slot holds a live member");
        // The slot below still exceeds d, so the member is interior and
        // both legs are strictly shorter walks.
        debug_assert!(mem.s != a && mem.s != b);
        self.decode(a, mem.s, out);
        self.decode(mem.s, b, out);
    }

    #[cfg(test)]
    fn slot_value(&self, k: usize, a: u32, b: u32) -> Dist {
        prefix(&self.base, &self.slots, k, a, b)
    }
}

impl ApspStructure for DetApsp {
    fn name(&self) -> &'static str {
        "approx_det"
    }

    fn n(&self) -> u32 {
        self.g.n()
    }

    fn graph(&self) -> &DecrementalGraph {
        &self.g
    }

    fn query(&self, u: VertexId, v: VertexId) -> Dist {
        if u == v {
            return 0;
        }
        prefix(&self.base, &self.slots, self.nlevels, u.0, v.0)
    }

    fn delete(&mut self, u: VertexId, v: VertexId) -> Result<Vec<DistChange>> {
        self.g.delete_edge(u, v)?;
        let f0 = self.base.on_delete(&self.g, u, v)?;
        let f = self.cascade(f0, false)?;
        let changes: Vec<DistChange> = f
            .into_iter()
            .map(|(a, b, old, new)| DistChange {
                u: VertexId(a),
                v: VertexId(b),
                old,
                new,
            })
            .collect();
        self.matrix_changes += changes.len() as u64;
        Ok(changes)
    }

    fn supports_paths(&self) -> bool {
        self.paths
    }

    fn report_path(&self, u: VertexId, v: VertexId) -> Option<Vec<VertexId>> {
        if !self.paths {
            return None;
        }
        if u == v {
            return Some(vec![u]);
        }
        if self.query(u, v) == INF {
            return None;
        }
        let mut out = Vec::new();
        self.decode(u.0, v.0, &mut out);
        out.push(v);
        Some(out)
    }

    fn counters(&self) -> Counters {
        let mut c = Counters {
            es_scan_steps: self.base.scan_steps(),
            queue_ops: self.queue_ops,
            matrix_changes: self.matrix_changes,
            ..Counters::default()
        };
        self.seps.add_counters(&mut c);
        c
    }
}
