//! Seeded random streams.
//!
//! Every stochastic step in the crate draws from a ChaCha stream derived from
//! a user seed plus a stable key (a claim id, a replicate index, ...), so the
//! output never depends on iteration or scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

/// A stream keyed by `(seed, key)`.
pub fn stream(seed: u64, key: &str) -> Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((key.len() as u64).to_le_bytes());
    hasher.update(key.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// A stream keyed by `(seed, index)`, used for bootstrap replicates and folds.
pub fn indexed(seed: u64, index: u64) -> Rng {
    stream(seed, &format!("#{index}"))
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
