//! Directed graph under edge deletions.
//!
//! Adjacency is stored twice (out-lists and in-lists) so both orientations
//! scan in O(degree). Deletion is O(1) by swap-remove through a position
//! index. A logical clock ticks once per deletion; structures that must stay
//! in lockstep with the graph check it.
//!
//! The adjacency as of construction time is kept in a second, immutable
//! copy. Tree structures keep per-vertex scan cursors into those frozen
//! lists; live lists reorder on swap-remove, which would invalidate any
//! cursor into them. Every tree shares the same frozen lists, so the copy
//! costs O(m) once rather than per tree.

use std::collections::HashMap;

use crate::{Error, Result, VertexId};

#[derive(Clone, Debug)]
pub struct DecrementalGraph {
    n: u32,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
    initial_out: Vec<Vec<u32>>,
    initial_in: Vec<Vec<u32>>,
    /// (u, v) -> (index of v in out_adj[u], index of u in in_adj[v]).
    pos: HashMap<(u32, u32), (u32, u32)>,
    clock: u64,
    initial_m: usize,
}

impl DecrementalGraph {
    pub fn from_edge_list(n: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let mut g = DecrementalGraph {
            n,
            out_adj: vec![Vec::new(); n as usize],
            in_adj: vec![Vec::new(); n as usize],
            initial_out: Vec::new(),
            initial_in: Vec::new(),
            pos: HashMap::with_capacity(edges.len()),
            clock: 0,
            initial_m: edges.len(),
        };
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(Error::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let oi = g.out_adj[u as usize].len() as u32;
            let ii = g.in_adj[v as usize].len() as u32;
            if g.pos.insert((u, v), (oi, ii)).is_some() {
                return Err(Error::DuplicateEdge(u, v));
            }
            g.out_adj[u as usize].push(v);
            g.in_adj[v as usize].push(u);
        }
        g.initial_out = g.out_adj.clone();
        g.initial_in = g.in_adj.clone();
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.pos.len()
    }

    /// Edge count before any deletion.
    #[inline]
    pub fn initial_m(&self) -> usize {
        self.initial_m
    }

    #[inline]
    pub fn clock(&self) -> u64 {
        self.clock
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.pos.contains_key(&(u.0, v.0))
    }

    #[inline]
    pub fn out_neighbors(&self, u: VertexId) -> &[u32] {
        &self.out_adj[u.idx()]
    }

    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[u32] {
        &self.in_adj[v.idx()]
    }

    /// Out-list as of construction, in a stable order. Entries may since
    /// have been deleted; check `has_edge` before using one.
    #[inline]
    pub fn initial_out_neighbors(&self, u: VertexId) -> &[u32] {
        &self.initial_out[u.idx()]
    }

    /// In-list as of construction, in a stable order.
    #[inline]
    pub fn initial_in_neighbors(&self, v: VertexId) -> &[u32] {
        &self.initial_in[v.idx()]
    }

    /// Out-degree plus in-degree, on the current edge set.
    #[inline]
    pub fn total_degree(&self, v: VertexId) -> usize {
        self.out_adj[v.idx()].len() + self.in_adj[v.idx()].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u as u32, v)))
    }

    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        let (oi, ii) = self
            .pos
            .remove(&(u.0, v.0))
            .ok_or(Error::EdgeAbsent(u.0, v.0))?;
        // Swap-remove from both lists, fixing the displaced entries' indices.
        let out = &mut self.out_adj[u.idx()];
        out.swap_remove(oi as usize);
        if (oi as usize) < out.len() {
            let moved = out[oi as usize];
            self.pos.get_mut(&(u.0, moved)).unwrap().0 = oi;
        }
        let inn = &mut self.in_adj[v.idx()];
        inn.swap_remove(ii as usize);
        if (ii as usize) < inn.len() {
            let moved = inn[ii as usize];
            self.pos.get_mut(&(moved, v.0)).unwrap().1 = ii;
        }
        self.clock += 1;
        Ok(())
    }
}
