//! Min-queues over two-leg path lengths through candidate witnesses.
//!
//! The exact structure keeps one such queue per distance scale and vertex
//! pair that crossed the scale. Entries never leave; keys never shrink.

use crate::Dist;

/// Stable reference to one entry of a [`TwoHopQueue`], valid for the
/// queue's whole lifetime.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Handle(pub u32);

/// Eager binary min-heap keyed by `(key, witness)`.
///
/// Supports push and increase-key only. Keys are leg sums in a decremental
/// graph, so they move in one direction; infinite keys stay enqueued
/// because a minimum of infinity is itself a meaningful answer. Ties break
/// toward the smaller witness id, which makes the minimum deterministic.
pub struct TwoHopQueue {
    keys: Vec<Dist>,
    witness: Vec<u32>,
    heap: Vec<u32>,
    pos: Vec<u32>,
    ops: u64,
}

impl TwoHopQueue {
    pub fn new() -> Self {
        TwoHopQueue {
            keys: Vec::new(),
            witness: Vec::new(),
            heap: Vec::new(),
            pos: Vec::new(),
            ops: 0,
        }
    }

    pub fn with_capacity(cap: usize) -> Self {
        TwoHopQueue {
            keys: Vec::with_capacity(cap),
            witness: Vec::with_capacity(cap),
            heap: Vec::with_capacity(cap),
            pos: Vec::with_capacity(cap),
            ops: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Heap pushes plus effective key bumps so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn key_of(&self, h: Handle) -> Dist {
        self.keys[h.0 as usize]
    }

    pub fn witness_of(&self, h: Handle) -> u32 {
        self.witness[h.0 as usize]
    }

    /// Smallest `(key, witness)` entry, if any.
    pub fn min(&self) -> Option<(Dist, u32)> {
        self.heap
            .first()
            .map(|&h| (self.keys[h as usize], self.witness[h as usize]))
    }

    pub fn push(&mut self, witness: u32, key: Dist) -> Handle {
        let h = self.keys.len() as u32;
        self.keys.push(key);
        self.witness.push(witness);
        self.pos.push(self.heap.len() as u32);
        self.heap.push(h);
        self.sift_up(self.heap.len() - 1);
        self.ops += 1;
        Handle(h)
    }

    /// Raise the key of `h`. Attempts to lower a key are bugs upstream;
    /// they are ignored after the debug check.
    pub fn increase_key(&mut self, h: Handle, new_key: Dist) {
        let cur = self.keys[h.0 as usize];
        debug_assert!(new_key >= cur, "two-hop keys move up only");
        if new_key <= cur {
            return;
        }
        self.keys[h.0 as usize] = new_key;
        self.sift_down(self.pos[h.0 as usize] as usize);
        self.ops += 1;
    }

    fn better(&self, a: u32, b: u32) -> bool {
        let ka = (self.keys[a as usize], self.witness[a as usize]);
        let kb = (self.keys[b as usize], self.witness[b as usize]);
        ka < kb
    }

    fn place(&mut self, i: usize, h: u32) {
        self.heap[i] = h;
        self.pos[h as usize] = i as u32;
    }

    fn sift_up(&mut self, mut i: usize) {
        let h = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.better(h, self.heap[parent]) {
                break;
            }
            self.place(i, self.heap[parent]);
            i = parent;
        }
        self.place(i, h);
    }

    fn sift_down(&mut self, mut i: usize) {
        let h = self.heap[i];
        loop {
            let mut best = i;
            let mut best_h = h;
            for c in [2 * i + 1, 2 * i + 2] {
                if c < self.heap.len() && self.better(self.heap[c], best_h) {
                    best = c;
                    best_h = self.heap[c];
                }
            }
            if best == i {
                break;
            }
            self.place(i, best_h);
            i = best;
        }
        self.place(i, h);
    }
}

impl Default for TwoHopQueue {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::INF;

    #[test]
    fn min_orders_by_key_then_witness() {
        let mut q = TwoHopQueue::new();
        q.push(5, 3);
        q.push(2, 3);
        let h9 = q.push(9, 1);
        assert_eq!(q.min(), Some((1, 9)));
        q.increase_key(h9, 4);
        assert_eq!(q.min(), Some((3, 2)));
        q.increase_key(h9, 4); // no-op
        assert_eq!(q.min(), Some((3, 2)));
    }

    #[test]
    fn infinite_keys_surface_as_the_minimum_when_alone() {
        let mut q = TwoHopQueue::new();
        q.push(7, INF);
        q.push(4, INF);
        assert_eq!(q.min(), Some((INF, 4)));
        q.push(11, 9);
        assert_eq!(q.min(), Some((9, 11)));
        assert_eq!(q.len(), 3);
    }

    #[test]
    fn ops_count_pushes_and_effective_bumps() {
        let mut q = TwoHopQueue::new();
        let a = q.push(1, 10);
        q.push(2, 20);
        q.increase_key(a, 15);
        q.increase_key(a, 15); // ineffective, not counted
        assert_eq!(q.ops(), 3);
    }

    #[test]
    fn fuzz_against_a_linear_scan() {
        let mut state = 0x6c078965u64;
        let mut next = move |m: u64| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) % m
        };
        let mut q = TwoHopQueue::new();
        let mut shadow: Vec<(Dist, u32)> = Vec::new();
        let mut handles: Vec<Handle> = Vec::new();
        for step in 0..400 {
            if shadow.is_empty() || next(3) == 0 {
                let w = step as u32;
                let key = if next(10) == 0 { INF } else { next(50) };
                handles.push(q.push(w, key));
                shadow.push((key, w));
            } else {
                let i = next(shadow.len() as u64) as usize;
                let bump = next(10);
                let key = shadow[i].0.saturating_add(bump);
                q.increase_key(handles[i], key);
                shadow[i].0 = key;
            }
            let want = shadow.iter().min().copied();
            assert_eq!(q.min(), want);
        }
    }
}
