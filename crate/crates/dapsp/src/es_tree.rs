//! Bounded-depth single-source BFS trees that survive edge deletions.
//!
//! An [`EsTree`] keeps, for one source and one direction, the exact distance
//! to every vertex within a depth bound `d`. Each deletion is absorbed in
//! amortized time proportional to the affected vertices' degrees, for a
//! total of O(m·d) over any deletion sequence. The classic ingredients:
//! levels only rise, each vertex keeps a persistent scan cursor into a
//! frozen copy of its adjacency, and a vertex whose level would pass `d`
//! is retired for good.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::graph::DecrementalGraph;
use crate::{ApspStructure, Counters, Dist, DistChange, Error, Result, VertexId, INF};

/// Level of a vertex that is unreachable within the depth bound.
pub const NO_LEVEL: u32 = u32::MAX;

/// Which way distances run relative to the source.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Orientation {
    /// Levels are distances source → v, following edges forward.
    FromSource,
    /// Levels are distances v → source, following edges backward.
    ToSource,
}

/// A single-source shortest-path tree maintained under deletions, with all
/// levels capped at a fixed depth.
pub struct EsTree {
    source: VertexId,
    depth: u32,
    orientation: Orientation,
    level: Vec<u32>,
    /// Scan position into the frozen parent-candidate list, per vertex.
    /// Moves forward only, and resets exactly when the vertex's level rises.
    cursor: Vec<u32>,
    clock: u64,
    scan_steps: u64,
}

impl EsTree {
    /// BFS the current graph from `source` out to `depth` and freeze the
    /// result into a maintainable tree. The tree is synchronized to the
    /// graph's current clock, so it can be created mid-sequence.
    pub fn build(
        g: &DecrementalGraph,
        source: VertexId,
        depth: Dist,
        orientation: Orientation,
    ) -> Self {
        let n = g.n() as usize;
        assert!(source.idx() < n, "source out of range");
        assert!(depth >= 1, "depth bound must be positive");
        // No finite distance exceeds n - 1, so deeper bounds are all alike.
        let depth = depth.min(g.n() as Dist) as u32;

        let mut level = vec![NO_LEVEL; n];
        level[source.idx()] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(source.0);
        while let Some(x) = queue.pop_front() {
            let lvl = level[x as usize];
            if lvl == depth {
                continue;
            }
            let succ = match orientation {
                Orientation::FromSource => g.out_neighbors(VertexId(x)),
                Orientation::ToSource => g.in_neighbors(VertexId(x)),
            };
            for &y in succ {
                if level[y as usize] == NO_LEVEL {
                    level[y as usize] = lvl + 1;
                    queue.push_back(y);
                }
            }
        }

        EsTree {
            source,
            depth,
            orientation,
            level,
            cursor: vec![0; n],
            clock: g.clock(),
            scan_steps: 0,
        }
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Raw level, with [`NO_LEVEL`] for vertices past the bound.
    pub fn level(&self, v: VertexId) -> u32 {
        self.level[v.idx()]
    }

    /// Distance as a [`Dist`], infinite past the bound.
    pub fn query(&self, v: VertexId) -> Dist {
        let l = self.level[v.idx()];
        if l == NO_LEVEL {
            INF
        } else {
            l as Dist
        }
    }

    /// Neighbor-list scan steps spent by all updates so far. Building is
    /// not counted; the charge bound covers the deletion sequence.
    pub fn scan_steps(&self) -> u64 {
        self.scan_steps
    }

    /// Frozen list of vertices that could ever serve as the parent of `x`.
    fn parent_list<'g>(&self, g: &'g DecrementalGraph, x: u32) -> &'g [u32] {
        match self.orientation {
            Orientation::FromSource => g.initial_in_neighbors(VertexId(x)),
            Orientation::ToSource => g.initial_out_neighbors(VertexId(x)),
        }
    }

    /// Frozen list of vertices that could ever have `x` as their parent.
    fn child_list<'g>(&self, g: &'g DecrementalGraph, x: u32) -> &'g [u32] {
        match self.orientation {
            Orientation::FromSource => g.initial_out_neighbors(VertexId(x)),
            Orientation::ToSource => g.initial_in_neighbors(VertexId(x)),
        }
    }

    /// Whether the oriented edge parent → child is still present.
    fn live(&self, g: &DecrementalGraph, parent: u32, child: u32) -> bool {
        match self.orientation {
            Orientation::FromSource => g.has_edge(VertexId(parent), VertexId(child)),
            Orientation::ToSource => g.has_edge(VertexId(child), VertexId(parent)),
        }
    }

    /// Advance `x`'s cursor to a live witness one level down, if any.
    ///
    /// A live candidate `w` always has `level[w] ≥ lvl - 1` while the
    /// update runs (levels only rise and `x` scanned its whole list before
    /// ever rising past `w + 1`), so testing `level[w] < lvl` is the same
    /// as testing for equality with `lvl - 1` and needs no care around the
    /// [`NO_LEVEL`] sentinel.
    fn find_parent(&mut self, g: &DecrementalGraph, x: u32, lvl: u32) -> bool {
        let list = self.parent_list(g, x);
        let mut cur = self.cursor[x as usize] as usize;
        let mut steps = 0u64;
        let mut found = false;
        while cur < list.len() {
            steps += 1;
            let w = list[cur];
            if self.level[w as usize] < lvl && self.live(g, w, x) {
                found = true;
                break;
            }
            cur += 1;
        }
        self.cursor[x as usize] = cur as u32;
        self.scan_steps += steps;
        found
    }

    /// Absorb one edge deletion that graph-core has already applied.
    ///
    /// Returns every vertex whose distance moved, once each, with the
    /// pre-deletion and final values, sorted by vertex id.
    pub fn on_delete(
        &mut self,
        g: &DecrementalGraph,
        u: VertexId,
        v: VertexId,
    ) -> Result<Vec<(VertexId, Dist, Dist)>> {
        if g.clock() != self.clock + 1 {
            return Err(Error::ClockSkew {
                structure: self.clock,
                graph: g.clock(),
            });
        }
        self.clock = g.clock();

        let (parent, child) = match self.orientation {
            Orientation::FromSource => (u.0, v.0),
            Orientation::ToSource => (v.0, u.0),
        };

        // Only a (lvl, lvl+1) edge can have been somebody's witness.
        let mut dirty: BinaryHeap<Reverse<(u32, u32)>> = BinaryHeap::new();
        let lp = self.level[parent as usize];
        let lc = self.level[child as usize];
        if lp != NO_LEVEL && lc != NO_LEVEL && lc == lp + 1 {
            dirty.push(Reverse((lc, child)));
        }

        // Pre-deletion level of each vertex that moves, recorded at its
        // first rise. Levels are monotone within the update, so the entry
        // made first is the oldest.
        let mut before: HashMap<u32, u32> = HashMap::new();

        while let Some(Reverse((lvl, x))) = dirty.pop() {
            if self.level[x as usize] != lvl {
                continue; // stale entry from before a rise
            }
            if self.find_parent(g, x, lvl) {
                continue;
            }

            // No witness at lvl - 1 is left; x rises one step.
            before.entry(x).or_insert(lvl);
            self.cursor[x as usize] = 0;
            if lvl < self.depth {
                // Children resting on x one level up must recheck.
                for &y in self.child_list(g, x) {
                    self.scan_steps += 1;
                    if self.level[y as usize] == lvl + 1 && self.live(g, x, y) {
                        dirty.push(Reverse((lvl + 1, y)));
                    }
                }
            }
            if lvl + 1 > self.depth {
                // Retired: never enqueued again, since enqueueing requires
                // a finite matching level.
                self.level[x as usize] = NO_LEVEL;
            } else {
                self.level[x as usize] = lvl + 1;
                dirty.push(Reverse((lvl + 1, x)));
            }
        }

        let mut changes: Vec<(VertexId, Dist, Dist)> = before
            .into_iter()
            .map(|(x, old)| {
                let now = self.level[x as usize];
                let now = if now == NO_LEVEL { INF } else { now as Dist };
                (VertexId(x), old as Dist, now)
            })
            .collect();
        changes.sort_unstable_by_key(|c| c.0 .0);
        Ok(changes)
    }

    /// Decode the tree path to `v` by walking witnesses downward.
    ///
    /// The vertex sequence runs in travel order: source first for
    /// [`Orientation::FromSource`], source last for
    /// [`Orientation::ToSource`]. `None` past the depth bound.
    pub fn path(&self, g: &DecrementalGraph, v: VertexId) -> Option<Vec<VertexId>> {
        if self.level[v.idx()] == NO_LEVEL {
            return None;
        }
        let mut walk = vec![v];
        let mut cur = v.0;
        while cur != self.source.0 {
            let lvl = self.level[cur as usize];
            let list = self.parent_list(g, cur);
            let w = *list
                .iter()
                .find(|&&w| self.level[w as usize] < lvl && self.live(g, w, cur))?;
            walk.push(VertexId(w));
            cur = w;
        }
        if self.orientation == Orientation::FromSource {
            walk.reverse();
        }
        Some(walk)
    }
}

/// The quadratic-memory baseline: one full-depth out-tree per vertex.
///
/// Serves as the reference competitor in the harness and as a second
/// implementation of the common structure interface for differential tests.
pub struct EsBaseline {
    g: DecrementalGraph,
    trees: Vec<EsTree>,
    matrix_changes: u64,
}

impl EsBaseline {
    pub fn new(n: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let g = DecrementalGraph::from_edge_list(n, edges)?;
        let depth = n.saturating_sub(1).max(1) as Dist;
        let trees = (0..n)
            .map(|s| EsTree::build(&g, VertexId(s), depth, Orientation::FromSource))
            .collect();
        Ok(EsBaseline {
            g,
            trees,
            matrix_changes: 0,
        })
    }
}

impl ApspStructure for EsBaseline {
    fn name(&self) -> &'static str {
        "es_baseline"
    }

    fn n(&self) -> u32 {
        self.g.n()
    }

    fn graph(&self) -> &DecrementalGraph {
        &self.g
    }

    fn query(&self, u: VertexId, v: VertexId) -> Dist {
        self.trees[u.idx()].query(v)
    }

    fn delete(&mut self, u: VertexId, v: VertexId) -> Result<Vec<DistChange>> {
        self.g.delete_edge(u, v)?;
        let mut out = Vec::new();
        for (root, tree) in self.trees.iter_mut().enumerate() {
            let moved = tree.on_delete(&self.g, u, v)?;
            out.extend(moved.into_iter().map(|(x, old, new)| DistChange {
                u: VertexId(root as u32),
                v: x,
                old,
                new,
            }));
        }
        self.matrix_changes += out.len() as u64;
        Ok(out)
    }

    fn supports_paths(&self) -> bool {
        true
    }

    fn report_path(&self, u: VertexId, v: VertexId) -> Option<Vec<VertexId>> {
        self.trees[u.idx()].path(&self.g, v)
    }

    fn counters(&self) -> Counters {
        let mut c = Counters::default();
        for t in &self.trees {
            c.es_scan_steps += t.scan_steps;
        }
        c.matrix_changes = self.matrix_changes;
        c
    }
}
