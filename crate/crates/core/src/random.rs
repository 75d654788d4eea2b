//! Seeded sample streams (SplitMix64 expansion of a 64-bit seed).

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Deterministic stream of uniform and normal variates.
#[derive(Clone, Debug)]
pub struct SeedStream {
    rng: SplitMix64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal variate (Box-Muller, one value per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Independent child stream seeded from this one.
    pub fn split(&mut self) -> SeedStream {
        SeedStream::new(self.next_u64())
    }
}
