//! Seeded random stream shared by the simulator, the trainer and the
//! evaluator.
//!
//! The generator is PCG64-MCG (128-bit multiplicative congruential state,
//! XSL-RR 64-bit output), seeded through `SeedableRng::seed_from_u64`.
//! Floats are built as `(next_u64 >> 11) · 2^-53`, giving a uniform value in
//! `[0, 1)`; an index in `0..n` is `floor(u · n)` of one such float. Every
//! consumer documents how many floats it draws, so a replay in another
//! language only needs those three rules.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

/// Odd 64-bit constant used to spread episode indices across seeds.
const EPISODE_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: Pcg64Mcg,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Pcg64Mcg::seed_from_u64(seed),
        }
    }

    /// Independent stream for episode `index` of a batch seeded with `seed`.
    /// Depends only on `(seed, index)`, so batches can be split or reordered.
    pub fn for_episode(seed: u64, index: u64) -> Self {
        Self::new(seed ^ index.wrapping_add(1).wrapping_mul(EPISODE_STRIDE))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform float in `[0, 1)` (one draw).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` (one draw). `n` must be positive.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }

    /// Samples a category from `weights` by inverse CDF (one draw). Rounding
    /// slack at the top end falls to the last category with positive mass.
    pub fn next_categorical(&mut self, weights: &[f64]) -> usize {
        let u = self.next_f64();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(43);
        assert_ne!(RngStream::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn floats_in_unit_interval() {
        let mut r = RngStream::new(7);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn categorical_skips_zero_mass() {
        let mut r = RngStream::new(1);
        for _ in 0..10_000 {
            assert_eq!(r.next_categorical(&[0.0, 1.0, 0.0]), 1);
        }
        // Weights summing slightly below one never fall off the end.
        for _ in 0..10_000 {
            assert!(r.next_categorical(&[0.3, 0.3, 0.3999999]) < 3);
        }
    }

    #[test]
    fn episode_streams_differ() {
        let a = RngStream::for_episode(42, 0).next_u64();
        let b = RngStream::for_episode(42, 1).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, RngStream::for_episode(42, 0).next_u64());
    }
}
