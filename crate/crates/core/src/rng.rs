//! Seed derivation and the portable generator behind every random draw.
//!
//! All streams are `ChaCha8Rng` seeded through `SeedableRng::seed_from_u64`,
//! whose expansion is fixed by `rand_core`, so a given seed produces the same
//! draws on every platform. Sub-seeds are derived with the SplitMix64
//! finaliser so that stream `i` never depends on how many other streams exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed `index` of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed.wrapping_add(GOLDEN)) ^ index.wrapping_mul(GOLDEN).wrapping_add(1))
}

/// Child seed addressed by a label and an index, e.g. `("generate", 3)`.
pub fn derive_labeled(seed: u64, label: &str, index: u64) -> u64 {
    // FNV-1a over the label bytes
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    derive_seed(derive_seed(seed, h), index)
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
