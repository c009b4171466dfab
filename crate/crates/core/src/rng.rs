//! Seeded random streams.
//!
//! Every generator in the crate draws from [`ChaCha8Rng`] (the 8-round
//! ChaCha stream cipher used as a counter-based generator). A stream is
//! identified by a `(global_seed, stream_index)` pair; the two are mixed
//! with SplitMix64 into the 64-bit seed handed to
//! `ChaCha8Rng::seed_from_u64`, so item `i` of a dataset receives the same
//! stream regardless of evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// One SplitMix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `global_seed`.
pub fn derive_seed(global_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(global_seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(global_seed: u64, index: u64) -> Rng {
    rng_from_seed(derive_seed(global_seed, index))
}
