//! Seed derivation and the portable generator used everywhere randomness appears.
//!
//! All stochastic work (surrogate generation, weight initialisation, sample shuffling)
//! draws from [`ChaCha8Rng`], whose output stream is specified independently of platform
//! and word size. Child seeds are derived from a master seed and a stable text label.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

/// Child seed for `label` under `master`: first 8 bytes (little endian) of
/// `SHA-256(master_le || label)`.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Child seed for the `index`-th task of a family.
pub fn derive_indexed(master: u64, label: &str, index: u64) -> u64 {
    derive_seed(master, &format!("{label}#{index}"))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
