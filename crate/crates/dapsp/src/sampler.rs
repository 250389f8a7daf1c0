//! One-shot subset sampling in time near the number of hits.
//!
//! Drawing n independent Bernoulli(p) coins costs n draws; here the whole
//! subset is produced by repeatedly locating the first hit index with a
//! conditional bisection over precomputed geometric masses, so a draw with
//! k hits costs O((k+1)·log n) work regardless of n.

use rand::Rng;

use crate::{Error, Result};

/// Precomputed geometric masses for one probability.
///
/// `hit_by[i]` is 1−(1−p)^i, accumulated from positive increments
/// p·(1−p)^{i−1} so it keeps relative accuracy down to tiny p. The miss
/// mass is served as its exact complement, which pins the hit/miss pair
/// to a sum of 1 within one rounding. Any window mass is a difference of
/// two `hit_by` entries.
#[derive(Clone, Debug)]
pub struct GeometricTable {
    p: f64,
    qpow: Vec<f64>,
    hit_by: Vec<f64>,
}

impl GeometricTable {
    /// Tabulate windows up to `n_max` slots for hit probability `p`.
    pub fn build(p: f64, n_max: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let q = 1.0 - p;
        let mut qpow = Vec::with_capacity(n_max as usize + 1);
        let mut hit_by = Vec::with_capacity(n_max as usize + 1);
        qpow.push(1.0);
        hit_by.push(0.0);
        for i in 1..=n_max as usize {
            hit_by.push((hit_by[i - 1] + p * qpow[i - 1]).min(1.0));
            qpow.push(qpow[i - 1] * q);
        }
        Ok(GeometricTable { p, qpow, hit_by })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n_max(&self) -> u32 {
        (self.qpow.len() - 1) as u32
    }

    /// Probability that the first hit lands exactly on slot `k` (1-based).
    pub fn first_hit_mass(&self, k: u32) -> f64 {
        self.qpow[k as usize - 1] * self.p
    }

    /// Probability of at least one hit among the first `window` slots.
    pub fn any_hit_mass(&self, window: u32) -> f64 {
        self.hit_by[window as usize]
    }

    /// Probability that all of the first `window` slots miss.
    pub fn miss_mass(&self, window: u32) -> f64 {
        1.0 - self.hit_by[window as usize]
    }

    /// Mass of the window `i1..=i2` of first-hit indices.
    fn window_mass(&self, i1: u32, i2: u32) -> f64 {
        self.hit_by[i2 as usize] - self.hit_by[i1 as usize - 1]
    }

    /// First hit among `window` slots, or `None` when all miss.
    ///
    /// Distributed as Pr[k] = (1−p)^{k−1}·p, Pr[None] = (1−p)^window,
    /// decided by a fresh uniform per bisection step, each conditioned on
    /// the surviving interval's exact residual mass.
    pub fn sample_first_index<R: Rng>(&self, window: u32, rng: &mut R) -> Option<u32> {
        assert!(window <= self.n_max(), "window exceeds the table");
        if window == 0 {
            return None;
        }
        let u: f64 = rng.gen();
        if u >= self.any_hit_mass(window) {
            return None;
        }
        let (mut lo, mut hi) = (1u32, window);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let ratio = self.window_mass(lo, mid) / self.window_mass(lo, hi);
            let u: f64 = rng.gen();
            if u < ratio {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    /// The subset of `1..=n` hit by independent Bernoulli(p) coins,
    /// produced hit by hit, sorted ascending.
    pub fn sample_subset<R: Rng>(&self, n: u32, rng: &mut R) -> Vec<u32> {
        assert!(n <= self.n_max(), "subset size exceeds the table");
        let mut picked = Vec::new();
        let mut pos = 0u32;
        while pos < n {
            match self.sample_first_index(n - pos, rng) {
                Some(k) => {
                    picked.push(pos + k);
                    pos += k;
                }
                None => break,
            }
        }
        picked
    }
}
