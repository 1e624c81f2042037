//! Counter-based 64-bit generator.
//!
//! Output `i` of a stream keyed by `k` is `mix64(k + (i + 1) * GOLDEN_GAMMA)`,
//! i.e. SplitMix64 viewed as a counter mode. Streams are derived from a seed
//! and a path so that results never depend on which worker ran what.

use crate::hash::{mix64, GOLDEN_GAMMA};

#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub const fn new(seed: u64) -> Self {
        Self { key: mix64(seed), counter: 0 }
    }

    /// Independent stream for child `index` of this stream's owner.
    pub const fn stream(seed: u64, index: u64) -> Self {
        Self::new(derive(seed, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform integer in `[0, bound)` via a widening multiply. `bound` must
    /// be nonzero.
    #[inline]
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform `f64` in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seed for the child identified by `index` under `seed`.
#[inline]
pub const fn derive(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
