//! Seeded randomness.
//!
//! Every random draw in the crate comes from [`ChaCha8Rng`], a counter-based
//! generator whose output stream is fixed by its 64-bit seed on every
//! platform. Independent components (graph, source, infection rate,
//! epidemic, observation, ...) draw from their own streams, whose seeds are
//! derived from one master seed with [`derive_seed`].

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Sub-seed for `role` and `index` under `master`: the first eight bytes
/// (little endian) of `SHA-256(master_le || role || 0x00 || index_le)`.
pub fn derive_seed(master: u64, role: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(role.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for `role` under `master`, shorthand for
/// `rng_from_seed(derive_seed(master, role, 0))`.
pub fn role_rng(master: u64, role: &str) -> ChaCha8Rng {
    rng_from_seed(derive_seed(master, role, 0))
}
