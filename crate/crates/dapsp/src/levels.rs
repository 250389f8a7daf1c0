//! Plumbing shared by the level-structured estimators: the bounded-tree
//! base slot, flat pair grids, lazily created separator banks, the
//! leg-to-entry reverse index, and an epoch-stamped dedup set.
//!
//! Terminology used throughout `exact`, `approx`, and `randomized`:
//! estimates live in a chain of slots. Slot 0 is the tree base; slot k
//! folds in the queues of the k-th maintained scale. Each slot's value for
//! a pair is the running minimum of everything below it, so it can only
//! move up when an edge goes away.

use std::collections::HashMap;

use crate::es_tree::{EsTree, Orientation};
use crate::graph::DecrementalGraph;
use crate::scales::SepWindows;
use crate::separator::SeparatorState;
use crate::{Counters, Dist, Result, VertexId};

/// One pair's estimate in the previous slot moving from `old` to `new`
/// within the current deletion. Slot k's change list drives slot k+1.
pub(crate) type LegChange = (u32, u32, Dist, Dist);

/// Flat n-by-n distance table.
pub(crate) struct PairGrid {
    n: usize,
    vals: Vec<Dist>,
}

impl PairGrid {
    pub fn new(n: u32, fill: Dist) -> Self {
        let n = n as usize;
        PairGrid {
            n,
            vals: vec![fill; n * n],
        }
    }

    #[inline]
    pub fn get(&self, a: u32, b: u32) -> Dist {
        self.vals[a as usize * self.n + b as usize]
    }

    #[inline]
    pub fn set(&mut self, a: u32, b: u32, val: Dist) {
        self.vals[a as usize * self.n + b as usize] = val;
    }
}

/// The bottom slot: one bounded-depth out-tree per source. Distances up
/// to the common depth are exact; everything past it reads as infinite.
pub(crate) struct BaseMatrix {
    trees: Vec<EsTree>,
}

impl BaseMatrix {
    pub fn build(g: &DecrementalGraph, depth: Dist) -> Self {
        let trees = (0..g.n())
            .map(|u| EsTree::build(g, VertexId(u), depth, Orientation::FromSource))
            .collect();
        BaseMatrix { trees }
    }

    #[inline]
    pub fn query(&self, a: u32, b: u32) -> Dist {
        self.trees[a as usize].query(VertexId(b))
    }

    pub fn tree(&self, a: u32) -> &EsTree {
        &self.trees[a as usize]
    }

    /// Pass one deletion to every tree. The flattened change list comes
    /// out sorted by (source, vertex): trees run in id order and each
    /// reports its risers sorted.
    pub fn on_delete(
        &mut self,
        g: &DecrementalGraph,
        u: VertexId,
        v: VertexId,
    ) -> Result<Vec<LegChange>> {
        let mut out = Vec::new();
        for (a, tree) in self.trees.iter_mut().enumerate() {
            for (x, old, new) in tree.on_delete(g, u, v)? {
                out.push((a as u32, x.0, old, new));
            }
        }
        Ok(out)
    }

    pub fn scan_steps(&self) -> u64 {
        self.trees.iter().map(|t| t.scan_steps()).sum()
    }
}

/// Per (slot, source) separator states, created on first trigger so that
/// sources whose estimates never reach a scale cost nothing there.
pub(crate) struct SepBank {
    n: u32,
    states: Vec<Option<Box<SeparatorState>>>,
}

impl SepBank {
    pub fn new(levels: usize, n: u32) -> Self {
        SepBank {
            n,
            states: (0..levels * n as usize).map(|_| None).collect(),
        }
    }

    #[inline]
    fn at(&self, k: usize, u: u32) -> usize {
        k * self.n as usize + u as usize
    }

    pub fn get(&self, k: usize, u: u32) -> Option<&SeparatorState> {
        self.states[self.at(k, u)].as_deref()
    }

    /// Members of source u's slot-k separator up to snapshot cut `cut`.
    pub fn members_at(&self, k: usize, u: u32, cut: usize) -> &[u32] {
        match self.get(k, u) {
            Some(s) => s.members_at(cut),
            None => &[],
        }
    }

    /// Grow-log length right now, the cut a snapshot taken now records.
    pub fn cut_now(&self, k: usize, u: u32) -> usize {
        self.get(k, u).map_or(0, |s| s.len())
    }

    /// Process one estimate crossing of the trigger line for vertex `x`
    /// seen from source `u`. Returns the separator members added.
    pub fn trigger(
        &mut self,
        g: &DecrementalGraph,
        k: usize,
        u: u32,
        x: u32,
        d: Dist,
        windows: SepWindows,
    ) -> Result<Vec<u32>> {
        let at = self.at(k, u);
        let state = self.states[at]
            .get_or_insert_with(|| Box::new(SeparatorState::with_windows(g, VertexId(u), d, windows)));
        state.on_trigger(g, VertexId(x))
    }

    pub fn add_counters(&self, c: &mut Counters) {
        for s in self.states.iter().flatten() {
            s.add_counters(c);
        }
    }
}

/// Reverse index from a previous-slot pair (a "leg") to the queue entries
/// whose keys read it. Entries only accumulate; a stale entry is harmless
/// because key recomputation is idempotent.
pub(crate) struct WitnessIndex<T> {
    map: HashMap<(u32, u32), Vec<T>>,
}

impl<T> WitnessIndex<T> {
    pub fn new() -> Self {
        WitnessIndex {
            map: HashMap::new(),
        }
    }

    pub fn register(&mut self, a: u32, b: u32, entry: T) {
        // Diagonal legs are pinned at zero and never fire.
        if a == b {
            return;
        }
        self.map.entry((a, b)).or_default().push(entry);
    }

    pub fn entries(&self, a: u32, b: u32) -> &[T] {
        self.map.get(&(a, b)).map_or(&[][..], |v| v.as_slice())
    }
}

/// Dedup set over pairs with O(1) inserts and O(1) epoch reset.
pub(crate) struct TouchSet {
    stamp: Vec<u32>,
    epoch: u32,
    items: Vec<(u32, u32)>,
    n: usize,
}

impl TouchSet {
    pub fn new(n: u32) -> Self {
        let n = n as usize;
        TouchSet {
            stamp: vec![0; n * n],
            epoch: 0,
            items: Vec::new(),
            n,
        }
    }

    /// Start a fresh round; previous contents vanish without a sweep.
    pub fn begin(&mut self) {
        self.epoch += 1;
        self.items.clear();
    }

    pub fn add(&mut self, a: u32, b: u32) {
        let i = a as usize * self.n + b as usize;
        if self.stamp[i] != self.epoch {
            self.stamp[i] = self.epoch;
            self.items.push((a, b));
        }
    }

    /// Touched pairs in (a, b) order.
    pub fn sorted(&mut self) -> &[(u32, u32)] {
        self.items.sort_unstable();
        &self.items
    }
}
