//! Geometric distance-scale ladder.
//!
//! Distances are bucketed into scales D_i = ρ^i with ρ = 34/33 for the
//! deterministic structures and ρ = 67/66 for the randomized one. Each
//! scale step is refined into c sub-steps of factor ρ^{1/c}, so every
//! comparison value any structure ever needs is ρ^{k/c} for some integer k.
//! This module materializes ⌊ρ^{k/c}⌋ for all needed k, exactly: a float
//! estimate is used when the floor is unambiguous and big-integer interval
//! checks settle anything near a boundary. Since gcd(34,33) = gcd(67,66) = 1,
//! ρ^{k/c} is never an integer for k ≥ 1, so the floor is always well
//! defined with strict inequalities on both sides.
//!
//! All runtime distance comparisons elsewhere in the crate are integer
//! lookups into this table; no floating point touches a correctness path
//! after construction.

use num_bigint::BigUint;

use crate::{Dist, Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Variant {
    Exact,
    ApproxDet,
    ApproxRand,
}

/// Layer windows for a separator search at one scale, as inclusive layer
/// indices. The source-side search accepts layers in [s_first, s_last],
/// the target-side reverse search in [0, v_last].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SepWindows {
    pub s_first: u64,
    pub s_last: u64,
    pub v_last: u64,
}

#[derive(Clone, Copy, Debug)]
struct LevelParams {
    trigger_floor: Dist,
    windows: SepWindows,
    radius: Dist,
}

#[derive(Clone, Debug)]
pub struct ScaleLadder {
    variant: Variant,
    n: u32,
    c: u32,
    i_max: u32,
    rho_num: u64,
    rho_den: u64,
    eps_prime: f64,
    small_cutoff: Dist,
    floors: Vec<Dist>,
    levels: Vec<LevelParams>,
}

impl ScaleLadder {
    /// Ladder sized from a stretch budget. For the approximate variants,
    /// c is the smallest subdivision count whose per-scale rounding factor
    /// ρ^{1/c} − 1 fits the per-level budget ln(1+eps)/⌊log_ρ n⌋ (halved
    /// for the randomized variant, whose estimates round twice per level).
    /// The exact variant has no stretch and uses c = 1.
    pub fn build(n: u32, eps: f64, variant: Variant) -> Result<ScaleLadder> {
        if n < 2 {
            return Err(Error::BadParams(format!("ladder needs n >= 2, got {n}")));
        }
        let c = match variant {
            Variant::Exact => 1,
            Variant::ApproxDet | Variant::ApproxRand => {
                if !(eps > 0.0 && eps <= 1.0 / 3.0) {
                    return Err(Error::EpsilonOutOfRange(eps));
                }
                let (num, den) = rho_of(variant);
                let i_max = exact_i_max(num, den, n);
                let mut target = (1.0 + eps).ln() / i_max as f64;
                if variant == Variant::ApproxRand {
                    target /= 2.0;
                }
                smallest_c(num, den, target)
            }
        };
        ScaleLadder::with_subdivisions(n, c, variant)
    }

    /// Ladder with the subdivision count picked directly. The stretch
    /// guarantee then follows from c rather than from any eps: the bound
    /// is ρ^{e/c} with e = i_max (deterministic) or 2·i_max (randomized).
    pub fn with_subdivisions(n: u32, c: u32, variant: Variant) -> Result<ScaleLadder> {
        if n < 2 || c == 0 {
            return Err(Error::BadParams(format!(
                "ladder needs n >= 2 and c >= 1, got n={n} c={c}"
            )));
        }
        let (rho_num, rho_den) = rho_of(variant);
        if variant == Variant::ApproxRand {
            // The sampled structure needs ρ^{(c+1)/c} <= 34/33 so that its
            // in-tree detours stay inside the deterministic scale step.
            let lhs = BigUint::from(rho_num).pow(c + 1) * BigUint::from(33u32).pow(c);
            let rhs = BigUint::from(34u32).pow(c) * BigUint::from(rho_den).pow(c + 1);
            if lhs > rhs {
                return Err(Error::BadParams(format!(
                    "randomized ladder with c={c} violates rho^((c+1)/c) <= 34/33"
                )));
            }
        }
        let i_max = exact_i_max(rho_num, rho_den, n);
        let ln_rho = (rho_num as f64 / rho_den as f64).ln();
        let eps_prime = (ln_rho / c as f64).exp_m1();

        let k_max = (i_max + 2) * (c + 2);
        let mut floors = Vec::with_capacity(k_max as usize + 1);
        for k in 0..=k_max {
            floors.push(exact_floor_pow(rho_num, rho_den, k, c, ln_rho));
        }
        debug_assert!(floors.windows(2).all(|w| w[0] <= w[1]));

        let mut levels = Vec::with_capacity(i_max as usize + 1);
        let mut num_pow = BigUint::from(1u32);
        let mut den_pow = BigUint::from(1u32);
        for i in 0..=i_max {
            if i > 0 {
                num_pow *= rho_num;
                den_pow *= rho_den;
            }
            let trigger_floor = big_to_dist(&(32u32 * &num_pow / (33u32 * &den_pow)));
            let windows = SepWindows {
                s_first: big_to_dist(&(2u32 * &num_pow / (3u32 * &den_pow))) + 1,
                s_last: big_to_dist(&(23u32 * &num_pow / (33u32 * &den_pow))),
                v_last: big_to_dist(&((&num_pow + 33u32 * &den_pow - 1u32) / (33u32 * &den_pow)))
                    .saturating_sub(1),
            };
            let radius = if variant == Variant::ApproxRand {
                exact_radius(rho_num, rho_den, i, c, eps_prime)
            } else {
                0
            };
            levels.push(LevelParams {
                trigger_floor,
                windows,
                radius,
            });
        }

        Ok(ScaleLadder {
            variant,
            n,
            c,
            i_max,
            rho_num,
            rho_den,
            eps_prime,
            small_cutoff: exact_small_cutoff(n),
            floors,
            levels,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn i_max(&self) -> u32 {
        self.i_max
    }

    pub fn rho(&self) -> (u64, u64) {
        (self.rho_num, self.rho_den)
    }

    /// ρ^{1/c} − 1, informational only (never compared against distances).
    pub fn eps_prime(&self) -> f64 {
        self.eps_prime
    }

    /// ⌈33·lg n⌉. Scales below this are owned by plain bounded-depth trees.
    pub fn small_cutoff(&self) -> Dist {
        self.small_cutoff
    }

    /// ⌊ρ^{k/c}⌋.
    #[inline]
    pub fn threshold(&self, k: u32) -> Dist {
        self.floors[k as usize]
    }

    /// ⌊D_i⌋ = ⌊ρ^i⌋, valid for i up to i_max + 1.
    #[inline]
    pub fn floor_d(&self, i: u32) -> Dist {
        self.threshold(i * self.c)
    }

    /// ⌊d_{i,j}⌋ = ⌊D_i · ρ^{j/c}⌋.
    #[inline]
    pub fn sub_scale_floor(&self, i: u32, j: u32) -> Dist {
        self.threshold(i * self.c + j)
    }

    /// Scale owning `dist`: the unique i with dist in (⌊D_i⌋, ⌊D_{i+1}⌋],
    /// where scale 0 also owns dist = 1.
    pub fn level_of(&self, dist: Dist) -> u32 {
        debug_assert!(dist >= 1 && dist <= self.n as Dist);
        // Smallest i with ⌊D_{i+1}⌋ >= dist.
        let mut lo = 0u32;
        let mut hi = self.i_max;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.floor_d(mid + 1) >= dist {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// ⌊(32/33)·D_i⌋. An estimate strictly above this has crossed (32/33)·D_i
    /// (the bound itself is never an integer, so floor+1 equals the ceiling).
    pub fn trigger_floor(&self, i: u32) -> Dist {
        self.levels[i as usize].trigger_floor
    }

    pub fn sep_windows(&self, i: u32) -> SepWindows {
        self.levels[i as usize].windows
    }

    /// ⌊ε′·D_i⌋, the in-tree radius of the randomized structure.
    pub fn radius(&self, i: u32) -> Dist {
        self.levels[i as usize].radius
    }

    /// First ladder rung at or above a depth cutoff, if any.
    pub fn first_level_at(&self, cutoff: Dist) -> Option<u32> {
        (0..=self.i_max).find(|&i| self.floor_d(i) >= cutoff)
    }

    /// Crossing value for the exact structure's scale i: a pair enters the
    /// scale when its prefix estimate first exceeds ⌊D_i⌋.
    #[inline]
    pub fn exact_crossing(&self, i: u32) -> Dist {
        self.floor_d(i)
    }

    /// Crossing value for the deterministic approximate structure:
    /// ⌊D_i·(1+ε′)^i⌋ = ⌊ρ^{i(c+1)/c}⌋.
    #[inline]
    pub fn det_crossing(&self, i: u32) -> Dist {
        self.threshold(i * (self.c + 1))
    }

    /// Key threshold of counting queue (i, j): ⌊(1+ε′)^i·d_{i,j}⌋,
    /// for j in 0..c.
    #[inline]
    pub fn det_queue_threshold(&self, i: u32, j: u32) -> Dist {
        debug_assert!(j < self.c);
        self.threshold(i * (self.c + 1) + j)
    }

    /// Activation value for the randomized structure:
    /// ⌊D_i·(1+ε′)^{2i}⌋ = ⌊ρ^{i(c+2)/c}⌋.
    #[inline]
    pub fn rand_activation(&self, i: u32) -> Dist {
        self.threshold(i * (self.c + 2))
    }

    /// Death threshold of sampled queue (i, j): ⌊d_{i,j}·(1+ε′)^{2i}⌋,
    /// for j in 0..=c+1.
    #[inline]
    pub fn rand_death_threshold(&self, i: u32, j: u32) -> Dist {
        debug_assert!(j <= self.c + 1);
        self.threshold(i * (self.c + 2) + j)
    }

    /// Upper bound on the stretch of the variant's estimates, as a float
    /// (test-side tolerance only; the exact guarantee is ρ^{e/c} with
    /// e = 0, i_max, or 2·i_max by variant).
    pub fn stretch_bound(&self) -> f64 {
        let e = match self.variant {
            Variant::Exact => 0,
            Variant::ApproxDet => self.i_max,
            Variant::ApproxRand => 2 * self.i_max,
        };
        let ln_rho = (self.rho_num as f64 / self.rho_den as f64).ln();
        (e as f64 * ln_rho / self.c as f64).exp()
    }
}

fn rho_of(variant: Variant) -> (u64, u64) {
    match variant {
        Variant::Exact | Variant::ApproxDet => (34, 33),
        Variant::ApproxRand => (67, 66),
    }
}

fn big_to_dist(x: &BigUint) -> Dist {
    let digits = x.to_u64_digits();
    match digits.len() {
        0 => 0,
        1 => digits[0],
        _ => panic!("scale parameter overflows u64"),
    }
}

/// Largest i with ρ^i ≤ n, by exact incremental powers.
fn exact_i_max(num: u64, den: u64, n: u32) -> u32 {
    let mut num_pow = BigUint::from(num);
    let mut den_pow = BigUint::from(den);
    let n_big = BigUint::from(n);
    let mut i = 0u32;
    while num_pow <= &n_big * &den_pow {
        i += 1;
        num_pow *= num;
        den_pow *= den;
    }
    i
}

/// Smallest c with ρ^{1/c} − 1 ≤ target.
fn smallest_c(num: u64, den: u64, target: f64) -> u32 {
    let ln_rho = (num as f64 / den as f64).ln();
    let mut c = ((ln_rho / target.ln_1p()).floor() as u32).max(1);
    while (ln_rho / c as f64).exp_m1() > target {
        c += 1;
    }
    c
}

/// ⌈33·lg n⌉, exactly: the smallest h with 2^h ≥ n^33.
fn exact_small_cutoff(n: u32) -> Dist {
    let p = BigUint::from(n).pow(33);
    let bits = p.bits();
    if p.count_ones() == 1 {
        bits - 1
    } else {
        bits
    }
}

/// ⌊ρ^{k/c}⌋ with a certified floor. The float estimate keeps its relative
/// error around 1e-13 (integer-power product plus one small exp), so a
/// fractional part at least 1e-6 from an integer is conclusive; anything
/// closer is settled by big-integer comparison.
fn exact_floor_pow(num: u64, den: u64, k: u32, c: u32, ln_rho: f64) -> Dist {
    let q = k / c;
    let r = k % c;
    let mut est = (r as f64 * ln_rho / c as f64).exp();
    let step = num as f64 / den as f64;
    for _ in 0..q {
        est *= step;
    }
    let fract = est.fract();
    let mut cand = est.floor() as u64;
    if fract > 1e-6 && fract < 1.0 - 1e-6 {
        return cand;
    }
    // Certify: cand^c · den^k ≤ num^k < (cand+1)^c · den^k.
    let num_k = BigUint::from(num).pow(k);
    let den_k = BigUint::from(den).pow(k);
    loop {
        if cand > 0 && BigUint::from(cand).pow(c) * &den_k > num_k {
            cand -= 1;
            continue;
        }
        if BigUint::from(cand + 1).pow(c) * &den_k <= num_k {
            cand += 1;
            continue;
        }
        return cand;
    }
}

/// ⌊ε′·D_i⌋ = ⌊ρ^i·(ρ^{1/c} − 1)⌋ with a certified floor.
fn exact_radius(num: u64, den: u64, i: u32, c: u32, eps_prime: f64) -> Dist {
    let mut rho_i = 1.0f64;
    let step = num as f64 / den as f64;
    for _ in 0..i {
        rho_i *= step;
    }
    let est = eps_prime * rho_i;
    let fract = est.fract();
    let cand = est.floor() as u64;
    if fract > 1e-6 && fract < 1.0 - 1e-6 {
        return cand;
    }
    // R ≤ ε′·ρ^i  ⟺  den·(num^i + R·den^i)^c ≤ num^{ic+1}.
    let num_i = BigUint::from(num).pow(i);
    let den_i = BigUint::from(den).pow(i);
    let bound = BigUint::from(num).pow(i * c + 1);
    let fits = |r: u64| (&num_i + r * &den_i).pow(c) * den <= bound;
    let mut r = cand;
    loop {
        if r > 0 && !fits(r) {
            r -= 1;
            continue;
        }
        if fits(r + 1) {
            r += 1;
            continue;
        }
        return r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent floor reference: binary search with nothing but
    /// big-integer comparisons.
    fn floor_pow_ref(num: u64, den: u64, k: u32, c: u32) -> u64 {
        let num_k = BigUint::from(num).pow(k);
        let den_k = BigUint::from(den).pow(k);
        let fits = |x: u64| BigUint::from(x).pow(c) * &den_k <= num_k;
        let mut hi = 2u64;
        while fits(hi) {
            hi *= 2;
        }
        let mut lo = hi / 2;
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn exact_ladder_frozen_values() {
        let l = ScaleLadder::build(100, 0.0, Variant::Exact).unwrap();
        assert_eq!(l.c(), 1);
        assert_eq!(l.i_max(), 154);
        assert_eq!(l.small_cutoff(), 220);
        assert_eq!(l.threshold(0), 1);
        assert_eq!(l.threshold(1), 1);
        assert_eq!(l.floor_d(154), 99);
        assert_eq!(l.floor_d(155), 102);
    }

    #[test]
    fn small_cutoff_exact_power_of_two() {
        // 33 * lg 1024 = 330 exactly.
        let l = ScaleLadder::build(1024, 0.0, Variant::Exact).unwrap();
        assert_eq!(l.small_cutoff(), 330);
        // 33 * lg 3 = 52.3...
        let l3 = ScaleLadder::build(3, 0.0, Variant::Exact).unwrap();
        assert_eq!(l3.small_cutoff(), 53);
    }

    #[test]
    fn floors_match_bigint_reference() {
        for (variant, c) in [(Variant::ApproxDet, 5), (Variant::ApproxRand, 3)] {
            let l = ScaleLadder::with_subdivisions(200, c, variant).unwrap();
            let (num, den) = l.rho();
            for k in [0, 1, 2, c - 1, c, c + 1, 7 * c + 3, 50 * c + 1, 123 * c + c - 1] {
                assert_eq!(
                    l.threshold(k),
                    floor_pow_ref(num, den, k, c),
                    "k={k} c={c} {variant:?}"
                );
            }
        }
    }

    #[test]
    fn floors_nondecreasing_and_composition() {
        let l = ScaleLadder::with_subdivisions(150, 4, Variant::ApproxDet).unwrap();
        for k in 1..(l.i_max() + 1) * (l.c() + 1) {
            assert!(l.threshold(k) >= l.threshold(k - 1));
        }
        // Composition identity: the queue threshold exponent i(c+1)+j.
        let c = l.c();
        for i in [0u32, 3, 40] {
            assert_eq!(l.det_crossing(i), l.threshold(i * (c + 1)));
            for j in 0..c {
                assert_eq!(l.det_queue_threshold(i, j), l.threshold(i * (c + 1) + j));
                let (num, den) = l.rho();
                assert_eq!(
                    l.det_queue_threshold(i, j),
                    floor_pow_ref(num, den, i * (c + 1) + j, c)
                );
            }
        }
    }

    #[test]
    fn levels_partition_distances() {
        for variant in [Variant::Exact, Variant::ApproxRand] {
            let l = ScaleLadder::with_subdivisions(1000, 2, variant).unwrap();
            assert_eq!(l.level_of(1), 0);
            let mut prev = 0;
            for d in 1..=1000u64 {
                let i = l.level_of(d);
                assert!(i >= prev, "owning scale must be monotone in distance");
                assert!(l.floor_d(i + 1) >= d);
                assert!(i == 0 || l.floor_d(i) < d, "d={d} i={i}");
                prev = i;
            }
        }
    }

    #[test]
    fn level_of_34_matches_definition() {
        let l = ScaleLadder::build(100, 0.0, Variant::Exact).unwrap();
        let i = l.level_of(34);
        assert!(l.floor_d(i + 1) >= 34 && l.floor_d(i) < 34);
        // ln 34 / ln(34/33) = 118.1, so the floors step 33 -> 34 at i = 119.
        assert_eq!(i, 118);
        assert_eq!(l.floor_d(118), 33);
        assert_eq!(l.floor_d(119), 34);
    }

    #[test]
    fn rand_ladder_respects_det_scale_cap() {
        // c = 1 would give (67/66)^2 > 34/33.
        assert!(ScaleLadder::with_subdivisions(100, 1, Variant::ApproxRand).is_err());
        let l = ScaleLadder::with_subdivisions(100, 2, Variant::ApproxRand).unwrap();
        assert_eq!(l.rho(), (67, 66));
        // Built from eps, c comes out far larger than 2 and still fine.
        let l2 = ScaleLadder::build(100, 1.0 / 3.0, Variant::ApproxRand).unwrap();
        assert!(l2.c() >= 2, "c = {}", l2.c());
    }

    #[test]
    fn eps_validation() {
        for bad in [0.0, -0.5, 0.34, 1.0] {
            assert!(matches!(
                ScaleLadder::build(50, bad, Variant::ApproxDet),
                Err(Error::EpsilonOutOfRange(_))
            ));
        }
        assert!(ScaleLadder::build(50, 1.0 / 3.0, Variant::ApproxDet).is_ok());
        assert!(ScaleLadder::build(1, 0.1, Variant::ApproxDet).is_err());
    }

    #[test]
    fn eps_built_ladder_meets_its_stretch_budget() {
        for (variant, mult) in [(Variant::ApproxDet, 1u32), (Variant::ApproxRand, 2)] {
            for eps in [0.05, 0.2, 1.0 / 3.0] {
                let l = ScaleLadder::build(300, eps, variant).unwrap();
                // (1+ε′)^{mult·i_max} ≤ 1+eps must hold by choice of c.
                let total = (mult * l.i_max()) as f64 * l.eps_prime().ln_1p();
                assert!(
                    total <= (1.0 + eps).ln() * (1.0 + 1e-9),
                    "{variant:?} eps={eps} c={} overshoots",
                    l.c()
                );
                assert!(l.stretch_bound() <= (1.0 + eps) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn separator_params_match_bigint_recompute() {
        let l = ScaleLadder::with_subdivisions(500, 3, Variant::ApproxRand).unwrap();
        let (num, den) = l.rho();
        for i in [200u32, 350, l.i_max()] {
            let np = BigUint::from(num).pow(i);
            let dp = BigUint::from(den).pow(i);
            let to = |x: BigUint| u64::try_from(x).unwrap();
            assert_eq!(l.trigger_floor(i), to(32u32 * &np / (33u32 * &dp)));
            let w = l.sep_windows(i);
            assert_eq!(w.s_first, to(2u32 * &np / (3u32 * &dp)) + 1);
            assert_eq!(w.s_last, to(23u32 * &np / (33u32 * &dp)));
            assert_eq!(w.v_last, to((&np + 33u32 * &dp - 1u32) / (33u32 * &dp)) - 1);
            assert!(w.s_first <= w.s_last, "nonempty source window at i={i}");
        }
    }

    #[test]
    fn radius_matches_rational_bound() {
        // c=2 on ρ=67/66: ε′ ≈ 0.00754, so radii turn nonzero once
        // D_i ≥ 1/ε′ ≈ 132.6, i.e. i = 325 upward for n = 500.
        let l = ScaleLadder::with_subdivisions(500, 2, Variant::ApproxRand).unwrap();
        let (num, den) = l.rho();
        for i in (0..=l.i_max()).step_by(37).chain([l.i_max()]) {
            let r = l.radius(i);
            // Exact sandwich: den·(num^i + R·den^i)^c ≤ num^{ic+1} fails at R+1.
            let num_i = BigUint::from(num).pow(i);
            let den_i = BigUint::from(den).pow(i);
            let bound = BigUint::from(num).pow(i * l.c() + 1);
            let fits = |x: u64| (&num_i + x * &den_i).pow(l.c()) * den <= bound;
            assert!(fits(r), "radius too big at i={i}");
            assert!(!fits(r + 1), "radius too small at i={i}");
        }
        assert_eq!(l.radius(0), 0);
        assert!(l.radius(l.i_max()) >= 1, "top radius should be nonzero");
    }

    #[test]
    fn first_level_at_cutoffs() {
        let l = ScaleLadder::build(100, 0.0, Variant::Exact).unwrap();
        let i = l.first_level_at(34).unwrap();
        assert_eq!(i, 119);
        assert!(l.floor_d(i) >= 34 && l.floor_d(i - 1) < 34);
        assert_eq!(l.first_level_at(1), Some(0));
        assert_eq!(l.first_level_at(10_000), None);
    }
}
