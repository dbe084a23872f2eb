//! Seed derivation.
//!
//! Every random stream in the crate is derived from a user seed plus a
//! counter (row index, iteration index, class label) so results do not depend
//! on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed from `(seed, counter)`.
pub fn derive_seed(seed: u64, counter: u64) -> u64 {
    mix64(mix64(seed) ^ counter.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Stream-specific RNG for `(seed, counter)`.
pub fn stream(seed: u64, counter: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, counter))
}

/// Seed for a named sub-task, stable across platforms and releases.
pub fn seed_for_label(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
