//! Seeded random streams.
//!
//! Every sample path is driven by a `Xoshiro256PlusPlus` generator seeded
//! through `seed_from_u64` (which expands the 64-bit seed with SplitMix64).
//! Replicate `r` of an experiment with base seed `b` uses the stream seed
//! [`replicate_seed`]`(b, r)`:
//!
//! ```text
//! z = b + (r + 1) * 0x9E3779B97F4A7C15          (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
//! seed = z ^ (z >> 31)
//! ```
//!
//! i.e. the `(r+1)`-th output of a SplitMix64 generator started at `b`.
//! Uniforms are `((next_u64 >> 11) + 0.5) * 2^-53`, which lies strictly
//! inside (0, 1), and normals are the inverse standard-normal CDF of a
//! uniform. One uniform is consumed per normal, so a path of length `n` is a
//! prefix of the path of length `2n` drawn from the same seed.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::special::std_normal_quantile;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `z`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `replicate` derived from `base_seed`.
pub fn replicate_seed(base_seed: u64, replicate: u64) -> u64 {
    mix64(base_seed.wrapping_add(replicate.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// A reproducible stream of uniform and standard normal variates.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: Xoshiro256PlusPlus,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Uniform variate in the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        std_normal_quantile(self.uniform())
    }
}
