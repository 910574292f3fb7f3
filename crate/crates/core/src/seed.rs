//! Seed fan-out.
//!
//! A run carries one global seed. Each subsystem gets its own stream id and
//! each trial its own index, so adding trials never perturbs earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used when deriving sub-seeds.
pub mod stream {
    pub const DATASET: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const PASSIVE: u64 = 4;
    pub const COMPARE: u64 = 5;
    pub const PERCEPTRON: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed for `(stream, index)` under `seed`.
pub fn sub_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream)).wrapping_add(index))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
