//! Trace generators. All take a seed and are fully reproducible.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::HashSet;

use crate::trace::{DeletionTrace, TraceEvent};
use crate::CliError;

/// Turn a deletion order into an event stream, inserting a full-matrix
/// query after every `qa_every` deletions (0 = never) and once at the
/// end when any were requested.
fn sprinkle(deletions: Vec<(u32, u32)>, qa_every: u32) -> Vec<TraceEvent> {
    let total = deletions.len();
    let mut events = Vec::with_capacity(total + 2);
    for (i, (u, v)) in deletions.into_iter().enumerate() {
        events.push(TraceEvent::Delete(u, v));
        if qa_every > 0 && (i + 1) % qa_every as usize == 0 {
            events.push(TraceEvent::QueryAll);
        }
    }
    if qa_every > 0 && (total == 0 || total % qa_every as usize != 0) {
        events.push(TraceEvent::QueryAll);
    }
    events
}

/// The stretching family: a directed path 0 -> 1 -> ... -> n-1 plus a
/// two-step skip (i, i+2) at every even i, with the skips deleted in
/// increasing order. Each deletion forces a block of pairs one step
/// farther, which is what drives the change-counting lower bound.
///
/// `densify` extra edges, sampled away from the family, are prepended
/// to the edge list and deleted before the skips.
pub fn lower_bound(n: u32, densify: u32, seed: u64, qa_every: u32) -> Result<DeletionTrace, CliError> {
    if n < 3 || n % 2 == 0 {
        return Err(CliError::Usage(format!(
            "the stretching family needs odd n >= 3, got {n}"
        )));
    }
    let path: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    let skips: Vec<(u32, u32)> = (0..n - 2).step_by(2).map(|i| (i, i + 2)).collect();

    let mut taken: HashSet<(u32, u32)> = path.iter().chain(skips.iter()).copied().collect();
    let slots = n as u64 * (n as u64 - 1) - taken.len() as u64;
    if densify as u64 > slots {
        return Err(CliError::Usage(format!(
            "cannot place {densify} extra edges, only {slots} slots remain"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut extra = Vec::with_capacity(densify as usize);
    while extra.len() < densify as usize {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && taken.insert((u, v)) {
            extra.push((u, v));
        }
    }

    let mut edges = extra.clone();
    edges.extend_from_slice(&path);
    edges.extend_from_slice(&skips);
    let mut deletions = extra;
    deletions.extend_from_slice(&skips);
    Ok(DeletionTrace {
        n,
        edges,
        events: sprinkle(deletions, qa_every),
    })
}

/// Uniform directed graph with `m` distinct edges; the trace deletes
/// all of them in a shuffled order.
pub fn random(n: u32, m: u64, seed: u64, qa_every: u32) -> Result<DeletionTrace, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("need n >= 2, got {n}")));
    }
    let slots = n as u64 * (n as u64 - 1);
    if m > slots {
        return Err(CliError::Usage(format!(
            "m = {m} exceeds the {slots} ordered pairs available at n = {n}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges: Vec<(u32, u32)>;
    if m * 2 >= slots {
        // Dense request: shuffle the whole slot space.
        edges = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        edges.shuffle(&mut rng);
        edges.truncate(m as usize);
    } else {
        let mut seen = HashSet::with_capacity(m as usize);
        edges = Vec::with_capacity(m as usize);
        while edges.len() < m as usize {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && seen.insert((u, v)) {
                edges.push((u, v));
            }
        }
    }
    let mut deletions = edges.clone();
    deletions.shuffle(&mut rng);
    Ok(DeletionTrace {
        n,
        edges,
        events: sprinkle(deletions, qa_every),
    })
}

/// Complete layered DAG: `layers` ranks of `width` vertices each, with
/// every vertex pointing at the whole next rank. Deletions are all
/// edges in a shuffled order. Distances here are rank differences, and
/// the wide uniform ranks exercise the layer-search machinery.
pub fn layered(layers: u32, width: u32, seed: u64, qa_every: u32) -> Result<DeletionTrace, CliError> {
    if layers < 2 || width < 1 {
        return Err(CliError::Usage(format!(
            "need at least 2 layers of width >= 1, got {layers} x {width}"
        )));
    }
    let n = layers
        .checked_mul(width)
        .filter(|&n| n <= 1 << 20)
        .ok_or_else(|| CliError::Usage(format!("{layers} x {width} vertices is too large")))?;
    let mut edges = Vec::with_capacity(((layers - 1) * width * width) as usize);
    for l in 0..layers - 1 {
        for a in 0..width {
            for b in 0..width {
                edges.push((l * width + a, (l + 1) * width + b));
            }
        }
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut deletions = edges.clone();
    deletions.shuffle(&mut rng);
    Ok(DeletionTrace {
        n,
        edges,
        events: sprinkle(deletions, qa_every),
    })
}
