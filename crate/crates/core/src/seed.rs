//! Seed derivation and the RNG used throughout the crate.

use rand::SeedableRng;

/// The generator behind every random draw (weights, noise, initial conditions).
pub type Rng = rand_chacha::ChaCha20Rng;

/// Human-readable description recorded in experiment outputs.
pub const RNG_DESCRIPTION: &str =
    "ChaCha20Rng (rand_chacha 0.9) seeded via seed_from_u64; Gaussian draws by rand_distr 0.5 StandardNormal (ziggurat)";

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed. Order matters.
pub fn derive(parts: &[u64]) -> u64 {
    parts.iter().fold(0x05ee_d0fc_4a05_u64, |acc, &p| mix(acc ^ mix(p)))
}
