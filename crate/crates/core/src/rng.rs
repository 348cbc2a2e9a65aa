//! Seeded substreams.
//!
//! Every random object in the crate is drawn from a substream identified by
//! `(seed, tag, index)`. The triple is folded through the SplitMix64 finalizer
//! into a 64-bit key that seeds a ChaCha8 block generator, so any single
//! sensing matrix, outlier pattern or trial can be regenerated in isolation
//! and results never depend on how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Purpose tags separating the substreams of one seed.
pub mod tag {
    pub const SENSING: u64 = 0x5345_4e53;
    pub const GROUND_TRUTH_U: u64 = 0x4754_5555;
    pub const GROUND_TRUTH_V: u64 = 0x4754_5656;
    pub const SUPPORT: u64 = 0x5355_5050;
    pub const OUTLIERS: u64 = 0x4f55_544c;
    pub const RIP_PROBE: u64 = 0x5249_5050;
    pub const INIT: u64 = 0x494e_4954;
    pub const TRIAL: u64 = 0x5452_4941;
    pub const PERTURB: u64 = 0x5045_5254;
}

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit key.
pub fn derive_key(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243f_6a88_85a3_08d3, |acc, &w| mix64(acc ^ mix64(w)))
}

/// A deterministic stream of uniform and standard normal variates.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    normals_drawn: u64,
}

impl Stream {
    pub fn new(seed: u64, tag: u64, index: u64) -> Self {
        Self::from_key(derive_key(&[seed, tag, index]))
    }

    pub fn from_key(key: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(key),
            normals_drawn: 0,
        }
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        self.rng.gen_range(0..bound)
    }

    pub fn normal(&mut self) -> f64 {
        self.normals_drawn += 1;
        self.rng.sample(StandardNormal)
    }

    /// Number of normal variates handed out so far.
    pub fn normals_drawn(&self) -> u64 {
        self.normals_drawn
    }
}
