//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose seed is
//! derived from a single 64-bit master seed plus a path of stream indices
//! (restart number, grid cell, trial, ...). The derivation folds each index
//! into the state with a SplitMix64 finalizer, so a stream depends only on
//! its path and never on the order in which parallel jobs run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep unrelated consumers of the same path apart.
pub mod tag {
    pub const INIT: u64 = 0x01;
    pub const RESTART: u64 = 0x02;
    pub const PERTURB: u64 = 0x03;
    pub const SUPPORT: u64 = 0x10;
    pub const SAMPLES: u64 = 0x11;
    pub const OPTIMIZER: u64 = 0x12;
    pub const SMC: u64 = 0x13;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of the stream at `path` below `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &idx| {
            splitmix64(acc.rotate_left(23) ^ splitmix64(idx.wrapping_add(0x5851_F42D_4C95_7F2D)))
        })
}

pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}
