//! Brute-force reference oracles.
//!
//! Everything in this module favors obviousness over speed. The maintained
//! structures are validated against these oracles, and the two independent
//! distance oracles (BFS sweep and min-plus squaring) are validated against
//! each other, so a bug would have to appear twice in different algorithms
//! to slip through.

use std::collections::VecDeque;

use crate::graph::DecrementalGraph;
use crate::{Dist, VertexId, INF};

/// Sentinel used by the raw BFS helpers for vertices with no path.
pub const UNREACHED: u32 = u32::MAX;

/// Dense distance matrix with `u32` entries, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: u32,
    d: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn get(&self, u: VertexId, v: VertexId) -> Dist {
        let raw = self.d[u.idx() * self.n as usize + v.idx()];
        if raw == UNREACHED {
            INF
        } else {
            raw as Dist
        }
    }

    pub fn finite_count(&self) -> u64 {
        self.d.iter().filter(|&&x| x != UNREACHED).count() as u64
    }
}

/// Single-source BFS levels. `forward` follows out-edges (distances from
/// `s`), otherwise in-edges (distances to `s`). Unreached slots hold
/// `u32::MAX`.
pub fn bfs_from(g: &DecrementalGraph, s: VertexId, forward: bool) -> Vec<u32> {
    bfs_avoiding(g, s, forward, None)
}

/// BFS levels in the graph with the masked vertices removed. The source is
/// explored even if masked (its outgoing steps still run), which callers
/// that remove a separator never rely on because sources stay outside.
pub fn bfs_avoiding(
    g: &DecrementalGraph,
    s: VertexId,
    forward: bool,
    avoid: Option<&[bool]>,
) -> Vec<u32> {
    let n = g.n() as usize;
    let mut dist = vec![UNREACHED; n];
    let mut queue = VecDeque::new();
    dist[s.idx()] = 0;
    queue.push_back(s.0);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x as usize];
        let nbrs = if forward {
            g.out_neighbors(VertexId(x))
        } else {
            g.in_neighbors(VertexId(x))
        };
        for &y in nbrs {
            if dist[y as usize] != UNREACHED {
                continue;
            }
            if let Some(mask) = avoid {
                if mask[y as usize] {
                    continue;
                }
            }
            dist[y as usize] = dx + 1;
            queue.push_back(y);
        }
    }
    dist
}

/// Full matrix by one forward BFS per source.
pub fn recompute(g: &DecrementalGraph) -> DistanceMatrix {
    let n = g.n();
    let mut d = Vec::with_capacity(n as usize * n as usize);
    for s in 0..n {
        d.extend_from_slice(&bfs_from(g, VertexId(s), true));
    }
    DistanceMatrix { n, d }
}

/// Independent second oracle: min-plus matrix squaring to a fixpoint.
/// Cubic per squaring, so keep `n` small.
pub fn min_plus_reference(n: u32, edges: &[(u32, u32)]) -> DistanceMatrix {
    let nn = n as usize;
    let mut cur: Vec<Dist> = vec![INF; nn * nn];
    for i in 0..nn {
        cur[i * nn + i] = 0;
    }
    for &(u, v) in edges {
        cur[u as usize * nn + v as usize] = 1;
    }
    loop {
        let mut next = cur.clone();
        for i in 0..nn {
            for k in 0..nn {
                let ik = cur[i * nn + k];
                if ik == INF {
                    continue;
                }
                for j in 0..nn {
                    let cand = ik.saturating_add(cur[k * nn + j]);
                    if cand < next[i * nn + j] {
                        next[i * nn + j] = cand;
                    }
                }
            }
        }
        if next == cur {
            break;
        }
        cur = next;
    }
    let d = cur
        .iter()
        .map(|&x| if x == INF { UNREACHED } else { x as u32 })
        .collect();
    DistanceMatrix { n, d }
}

/// Validates a walk from `u` to `v` against the current graph and returns
/// its length. Repeated vertices are fine; a walk still certifies an upper
/// bound on the distance.
pub fn check_path(
    g: &DecrementalGraph,
    u: VertexId,
    v: VertexId,
    path: &[VertexId],
) -> std::result::Result<u64, String> {
    if path.first() != Some(&u) {
        return Err(format!("path must start at {u}, got {:?}", path.first()));
    }
    if path.last() != Some(&v) {
        return Err(format!("path must end at {v}, got {:?}", path.last()));
    }
    for w in path.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(format!("missing edge ({}, {})", w[0], w[1]));
        }
    }
    Ok((path.len() - 1) as u64)
}

/// Shortest-path DAG for one ordered pair: the subgraph of edges that lie
/// on at least one shortest path from `s` to `v`.
pub struct ShortestPathDag {
    dist_s: Vec<u32>,
    dist_to_v: Vec<u32>,
    target: u32,
}

impl ShortestPathDag {
    pub fn build(g: &DecrementalGraph, s: VertexId, v: VertexId) -> Self {
        let dist_s = bfs_from(g, s, true);
        let dist_to_v = bfs_from(g, v, false);
        let target = dist_s[v.idx()];
        ShortestPathDag {
            dist_s,
            dist_to_v,
            target,
        }
    }

    #[inline]
    pub fn target_dist(&self) -> Option<u32> {
        (self.target != UNREACHED).then_some(self.target)
    }

    /// Whether `x` lies on some shortest path. False everywhere when the
    /// pair is disconnected.
    #[inline]
    pub fn on_path(&self, x: VertexId) -> bool {
        self.target != UNREACHED
            && self.dist_s[x.idx()] != UNREACHED
            && self.dist_to_v[x.idx()] != UNREACHED
            && self.dist_s[x.idx()] + self.dist_to_v[x.idx()] == self.target
    }

    /// Whether the edge `(x, y)` lies on some shortest path.
    #[inline]
    pub fn dag_edge(&self, x: VertexId, y: VertexId) -> bool {
        self.on_path(x) && self.on_path(y) && self.dist_s[y.idx()] == self.dist_s[x.idx()] + 1
    }
}

/// Which members of a vertex set are the first set-vertex on some shortest
/// `s -> v` path, and whether some shortest path avoids the set entirely.
#[derive(Debug, PartialEq, Eq)]
pub struct FirstHits {
    pub hits: Vec<VertexId>,
    pub misses: bool,
}

/// First-hit analysis of the set `{x : in_x[x]}` against all shortest
/// `s -> v` paths. With no shortest path at all, the answer is vacuous
/// (no hits, no misses).
pub fn first_hits(g: &DecrementalGraph, s: VertexId, v: VertexId, in_x: &[bool]) -> FirstHits {
    let dag = ShortestPathDag::build(g, s, v);
    if dag.target_dist().is_none() {
        return FirstHits {
            hits: Vec::new(),
            misses: false,
        };
    }
    if in_x[s.idx()] {
        // Every path starts at s, so s is the unique first hit.
        return FirstHits {
            hits: vec![s],
            misses: false,
        };
    }
    // Walk the DAG from s through set-free vertices only.
    let n = g.n() as usize;
    let mut in_r0 = vec![false; n];
    let mut queue = VecDeque::new();
    in_r0[s.idx()] = true;
    queue.push_back(s.0);
    while let Some(x) = queue.pop_front() {
        for &y in g.out_neighbors(VertexId(x)) {
            if !dag.dag_edge(VertexId(x), VertexId(y)) || in_r0[y as usize] || in_x[y as usize] {
                continue;
            }
            in_r0[y as usize] = true;
            queue.push_back(y);
        }
    }
    let mut hits = Vec::new();
    for x in 0..n as u32 {
        if !in_x[x as usize] || !dag.on_path(VertexId(x)) {
            continue;
        }
        let found = g
            .in_neighbors(VertexId(x))
            .iter()
            .any(|&p| in_r0[p as usize] && dag.dag_edge(VertexId(p), VertexId(x)));
        if found {
            hits.push(VertexId(x));
        }
    }
    FirstHits {
        hits,
        misses: in_r0[v.idx()],
    }
}

/// Every shortest `s -> v` path, via DFS over the shortest-path DAG.
/// Stops once `cap` paths are collected; meant for tiny cross-checks.
pub fn enumerate_shortest_paths(
    g: &DecrementalGraph,
    s: VertexId,
    v: VertexId,
    cap: usize,
) -> Vec<Vec<VertexId>> {
    let dag = ShortestPathDag::build(g, s, v);
    let mut out = Vec::new();
    if dag.target_dist().is_none() {
        return out;
    }
    let mut stack = vec![s];
    dfs_paths(g, &dag, v, &mut stack, &mut out, cap);
    out
}

fn dfs_paths(
    g: &DecrementalGraph,
    dag: &ShortestPathDag,
    v: VertexId,
    stack: &mut Vec<VertexId>,
    out: &mut Vec<Vec<VertexId>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    let x = *stack.last().unwrap();
    if x == v {
        out.push(stack.clone());
        return;
    }
    let mut nbrs: Vec<u32> = g.out_neighbors(x).to_vec();
    nbrs.sort_unstable();
    for y in nbrs {
        if dag.dag_edge(x, VertexId(y)) {
            stack.push(VertexId(y));
            dfs_paths(g, dag, v, stack, out, cap);
            stack.pop();
        }
    }
}

/// Total number of (ordered pair, value) movements across a deletion
/// sequence, by full recomputation after every step. Going unreachable
/// counts as one movement.
pub fn count_matrix_changes(n: u32, edges: &[(u32, u32)], deletions: &[(u32, u32)]) -> u64 {
    let mut g = DecrementalGraph::from_edge_list(n, edges).expect("oracle input must be valid");
    let mut prev = recompute(&g);
    let mut total = 0u64;
    for &(u, v) in deletions {
        g.delete_edge(VertexId(u), VertexId(v))
            .expect("oracle deletion must exist");
        let cur = recompute(&g);
        for a in 0..n {
            for b in 0..n {
                if prev.get(VertexId(a), VertexId(b)) != cur.get(VertexId(a), VertexId(b)) {
                    total += 1;
                }
            }
        }
        prev = cur;
    }
    total
}

/// Audits a separator state for one source against the scale distance
/// `num / den`.
///
/// The guarantee is graph-theoretic, over reachability with the separator
/// set removed: every vertex still reachable from `s` there must sit at
/// full-graph distance strictly below (32/33) of the scale (anything
/// further would have triggered and been separated), and every vertex
/// separated by the set must sit at full-graph distance strictly beyond
/// 2/3 of the scale (the separator never cuts anything closer). Cut-off
/// flags must only ever be set on genuinely separated vertices.
pub fn check_part1(
    g: &DecrementalGraph,
    s: VertexId,
    in_s: &[bool],
    cut_off: &[bool],
    num: u64,
    den: u64,
) -> std::result::Result<(), String> {
    let full = bfs_from(g, s, true);
    let removed = bfs_avoiding(g, s, true, Some(in_s));
    for x in 0..g.n() {
        let xi = x as usize;
        if x == s.0 || in_s[xi] {
            continue;
        }
        let reachable = removed[xi] != UNREACHED;
        if cut_off[xi] && reachable {
            return Err(format!(
                "vertex {x} is flagged cut off but still reachable with the separator removed"
            ));
        }
        let d = full[xi];
        if reachable {
            if d == UNREACHED || 33 * (d as u64) * den >= 32 * num {
                return Err(format!(
                    "reachable vertex {x} at full-graph distance {} is not below (32/33)*{num}/{den}",
                    if d == UNREACHED { u64::MAX } else { d as u64 }
                ));
            }
        } else if d != UNREACHED && 3 * (d as u64) * den <= 2 * num {
            return Err(format!(
                "separated vertex {x} at full-graph distance {d} is not beyond (2/3)*{num}/{den}"
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DecrementalGraph;

    fn vid(x: u32) -> VertexId {
        VertexId(x)
    }

    fn path_graph(n: u32) -> DecrementalGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        DecrementalGraph::from_edge_list(n, &edges).unwrap()
    }

    #[test]
    fn bfs_on_a_path() {
        let g = path_graph(5);
        assert_eq!(bfs_from(&g, vid(0), true), vec![0, 1, 2, 3, 4]);
        assert_eq!(
            bfs_from(&g, vid(0), false),
            vec![0, UNREACHED, UNREACHED, UNREACHED, UNREACHED]
        );
        assert_eq!(bfs_from(&g, vid(4), false), vec![4, 3, 2, 1, 0]);
    }

    #[test]
    fn bfs_respects_mask() {
        // Diamond 0 -> {1, 2} -> 3 with 1 masked out.
        let g = DecrementalGraph::from_edge_list(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let mask = vec![false, true, false, false];
        let d = bfs_avoiding(&g, vid(0), true, Some(&mask));
        assert_eq!(d, vec![0, UNREACHED, 1, 2]);
    }

    #[test]
    fn two_oracles_agree_on_random_graphs() {
        // Deterministic LCG so the test is reproducible without rand.
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 33
        };
        for n in [2u32, 5, 9, 12] {
            for density in [2u64, 4] {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in 0..n {
                        if u != v && next() % 10 < density {
                            edges.push((u, v));
                        }
                    }
                }
                let g = DecrementalGraph::from_edge_list(n, &edges).unwrap();
                let a = recompute(&g);
                let b = min_plus_reference(n, &edges);
                for u in 0..n {
                    for v in 0..n {
                        assert_eq!(
                            a.get(vid(u), vid(v)),
                            b.get(vid(u), vid(v)),
                            "mismatch at ({u}, {v}) n={n} density={density}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn walk_checker() {
        let g = DecrementalGraph::from_edge_list(4, &[(0, 1), (1, 2), (2, 1), (1, 3)]).unwrap();
        let walk: Vec<_> = [0, 1, 2, 1, 3].map(vid).into();
        assert_eq!(check_path(&g, vid(0), vid(3), &walk), Ok(4));
        assert!(check_path(&g, vid(0), vid(3), &[vid(0), vid(3)]).is_err());
        assert!(check_path(&g, vid(1), vid(3), &walk).is_err());
        assert_eq!(check_path(&g, vid(2), vid(2), &[vid(2)]), Ok(0));
    }

    #[test]
    fn dag_membership() {
        // Two shortest 0 -> 4 routes (via 1 or via 2) and one long detour via 5.
        let g = DecrementalGraph::from_edge_list(
            6,
            &[(0, 1), (0, 2), (1, 4), (2, 4), (0, 3), (3, 5), (5, 4)],
        )
        .unwrap();
        let dag = ShortestPathDag::build(&g, vid(0), vid(4));
        assert_eq!(dag.target_dist(), Some(2));
        for x in [0, 1, 2, 4] {
            assert!(dag.on_path(vid(x)), "{x} should be on a shortest path");
        }
        for x in [3, 5] {
            assert!(!dag.on_path(vid(x)), "{x} is only on the detour");
        }
        assert!(dag.dag_edge(vid(0), vid(1)));
        assert!(dag.dag_edge(vid(2), vid(4)));
        assert!(!dag.dag_edge(vid(0), vid(3)));
        assert!(!dag.dag_edge(vid(1), vid(2)));
    }

    #[test]
    fn first_hits_against_enumeration() {
        // Layered graph with a bypass: plenty of distinct shortest paths.
        let g = DecrementalGraph::from_edge_list(
            8,
            &[
                (0, 1),
                (0, 2),
                (1, 3),
                (2, 3),
                (1, 4),
                (2, 4),
                (3, 5),
                (4, 5),
                (0, 6),
                (6, 7),
                (7, 5),
            ],
        )
        .unwrap();
        let paths = enumerate_shortest_paths(&g, vid(0), vid(5), 1000);
        assert_eq!(paths.len(), 5, "4 layered routes plus the 0-6-7-5 bypass");
        for strategy in 0..3u32 {
            let in_x: Vec<bool> = (0..8)
                .map(|x| match strategy {
                    0 => x == 3,
                    1 => x == 3 || x == 4,
                    _ => x == 3 || x == 7,
                })
                .collect();
            let got = first_hits(&g, vid(0), vid(5), &in_x);
            // Reference answer straight from the path list.
            let mut want_hits = Vec::new();
            let mut want_misses = false;
            for p in &paths {
                match p.iter().find(|x| in_x[x.idx()]) {
                    Some(&h) => {
                        if !want_hits.contains(&h) {
                            want_hits.push(h);
                        }
                    }
                    None => want_misses = true,
                }
            }
            want_hits.sort();
            assert_eq!(got.hits, want_hits, "strategy {strategy}");
            assert_eq!(got.misses, want_misses, "strategy {strategy}");
        }
    }

    #[test]
    fn first_hits_source_and_disconnected_cases() {
        let g = path_graph(3);
        let all = |b: bool| vec![b; 3];
        assert_eq!(
            first_hits(&g, vid(0), vid(2), &[true, false, false]),
            FirstHits { hits: vec![vid(0)], misses: false }
        );
        assert_eq!(
            first_hits(&g, vid(2), vid(0), &all(false)),
            FirstHits { hits: vec![], misses: false },
            "no path at all is vacuous"
        );
        assert_eq!(
            first_hits(&g, vid(0), vid(2), &all(false)),
            FirstHits { hits: vec![], misses: true }
        );
    }

    #[test]
    fn change_counting_on_a_path() {
        // Deleting the middle edge of 0-1-2-3 disconnects the two halves:
        // pairs (0,2), (0,3), (1,2), (1,3) all move to unreachable.
        let edges = [(0, 1), (1, 2), (2, 3)];
        assert_eq!(count_matrix_changes(4, &edges, &[(1, 2)]), 4);
        // Then deleting (0,1) moves (0,1) only.
        assert_eq!(count_matrix_changes(4, &edges, &[(1, 2), (0, 1)]), 5);
    }

    #[test]
    fn part1_audit_accepts_and_rejects() {
        // 0 -> 1 -> 2 -> 3 -> 4 -> 5, separator {3}, scale distance 5.
        let g = path_graph(6);
        let mut in_s = vec![false; 6];
        in_s[3] = true;
        let mut cut = vec![false; 6];
        cut[4] = true;
        cut[5] = true;
        // With 3 removed, 4 and 5 are separated; their full-graph distances
        // 4 and 5 are beyond 2/3 * 5. Reachable 1, 2 are below (32/33) * 5.
        assert!(check_part1(&g, vid(0), &in_s, &cut, 5, 1).is_ok());
        // Flags are optional (separation itself is what is audited).
        cut[5] = false;
        assert!(check_part1(&g, vid(0), &in_s, &cut, 5, 1).is_ok());
        // Flagging a still-reachable vertex must fail.
        cut[2] = true;
        assert!(check_part1(&g, vid(0), &in_s, &cut, 5, 1).is_err());
        cut[2] = false;
        // Scale 2: reachable vertex 2 violates 33*2 < 32*2.
        assert!(check_part1(&g, vid(0), &in_s, &cut, 2, 1).is_err());
    }

    #[test]
    fn part1_audit_rejects_a_close_separated_vertex() {
        // 0 -> 1 -> 2 with separator {1}: vertex 2 is separated at
        // full-graph distance 2, which is not beyond 2/3 * 5.
        let g = path_graph(3);
        let in_s = vec![false, true, false];
        let cut = vec![false; 3];
        assert!(check_part1(&g, vid(0), &in_s, &cut, 5, 1).is_err());
        // At scale 2 the same layout is fine: 3*2 > 2*2.
        assert!(check_part1(&g, vid(0), &in_s, &cut, 2, 1).is_ok());
    }
}
