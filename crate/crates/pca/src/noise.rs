//! Deterministic, counter-addressable uniform noise.
//!
//! Coupling from the past re-reads the *same* noise value `r_k^t` every time a
//! restart probes a deeper horizon, so noise must be a pure function of
//! `(seed, time, cell)` rather than a streamed generator: no storage, no
//! replay buffers, and bit-exact reproducibility across platforms because the
//! construction only uses integer arithmetic plus one final division by 2^53.
//!
//! The mixer is the 64-bit finalizer used by SplitMix64. Two rounds with the
//! seed folded in between decorrelate the structured `(t, k)` counter grid.
//!
//! Frozen test vectors (checked in `tests` below; any change to these values
//! is a breaking change for stored experiment outputs):
//!
//! | seed                 | t   | k   | uniform_at            |
//! |----------------------|-----|-----|-----------------------|
//! | 0                    | 0   | 0   | 0.7599283915155969    |
//! | 0                    | 0   | 1   | 0.7910054164153706    |
//! | 0                    | -1  | 0   | 0.6706894234372875    |
//! | 1                    | 0   | 0   | 0.8073005056086031    |
//! | 0x9e3779b97f4a7c15   | -37 | 91  | 0.5149008043268164    |

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer: a bijective avalanche mixer on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The uniform variate attached to cell `k` at time `t` under `seed`.
///
/// Pure, stateless, and injective in `(t, k)` for `|t|, |k| < 2^31` (the pair
/// is packed into one 64-bit counter). Returns a value in `[0, 1)` with 53
/// bits of precision.
#[inline]
pub fn uniform_at(seed: u64, t: i64, k: i64) -> f64 {
    let counter = ((t as u64) << 32) | (k as u64 & 0xffff_ffff);
    // The salt keeps the all-zero input (seed 0, origin cell) off the
    // mixer's zero fixed point.
    let mut z = counter.wrapping_mul(GOLDEN).wrapping_add(seed) ^ 0x1f83_d9ab_fb41_bd6b;
    z = mix64(z);
    z = mix64(z ^ seed);
    // Top 53 bits -> [0, 1).
    ((z >> 11) as f64) * (1.0 / (1u64 << 53) as f64)
}

/// Derive an independent stream seed, e.g. one seed per Monte-Carlo trial.
#[inline]
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream.wrapping_mul(GOLDEN).wrapping_add(0xd134_2543_de82_ef95)))
}

/// A seeded view over [`uniform_at`]: the noise environment of one sampler run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseField {
    seed: u64,
}

impl NoiseField {
    pub fn new(seed: u64) -> Self {
        NoiseField { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The uniform for cell `k` in the update leaving time `t`.
    #[inline]
    pub fn at(&self, t: i64, k: i64) -> f64 {
        uniform_at(self.seed, t, k)
    }
}

/// Small sequential generator for test fixtures (random rules, random
/// initial configurations). Not used by the samplers, which address noise
/// through [`uniform_at`] only.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..bound`.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        // Bias is negligible for the small bounds used in tests.
        self.next_u64() % bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_vectors() {
        let cases: &[(u64, i64, i64, f64)] = &[
            (0, 0, 0, 0.7599283915155969),
            (0, 0, 1, 0.7910054164153706),
            (0, -1, 0, 0.6706894234372875),
            (1, 0, 0, 0.8073005056086031),
            (0x9e3779b97f4a7c15, -37, 91, 0.5149008043268164),
        ];
        for &(seed, t, k, expect) in cases {
            assert_eq!(uniform_at(seed, t, k), expect, "seed={seed} t={t} k={k}");
        }
    }

    #[test]
    fn pure_and_distinct() {
        let a = uniform_at(7, -3, 12);
        let b = uniform_at(7, -3, 12);
        assert_eq!(a, b);
        assert_ne!(uniform_at(7, -3, 12), uniform_at(7, -3, 13));
        assert_ne!(uniform_at(7, -3, 12), uniform_at(7, -2, 12));
        assert_ne!(uniform_at(7, -3, 12), uniform_at(8, -3, 12));
    }

    #[test]
    fn range_and_mean() {
        // Empirical mean of 10^6 draws within 0.5 +- 0.002.
        let mut sum = 0.0;
        for i in 0..1_000_000i64 {
            let u = uniform_at(42, i / 1000, i % 1000);
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / 1e6;
        assert!((mean - 0.5).abs() < 0.002, "mean = {mean}");
    }

    #[test]
    fn negative_times_and_cells_are_distinct_addresses() {
        // (t, k) packing must not collide for the mixed-sign ranges CFTP uses.
        use std::collections::HashSet;
        let mut seen = HashSet::new();
        for t in -40..40i64 {
            for k in -40..40i64 {
                assert!(seen.insert(uniform_at(99, t, k).to_bits()), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn derive_seed_spreads() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(5, i)).collect();
        let distinct: std::collections::HashSet<_> = s.iter().collect();
        assert_eq!(distinct.len(), s.len());
    }
}
