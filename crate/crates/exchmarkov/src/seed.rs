//! Deterministic seed derivation.
//!
//! All randomness in the crate flows from explicit 64-bit master seeds.
//! Sub-seeds are derived by hashing the master seed together with a short
//! text label and a list of integer coordinates, so that independent uses
//! (per step, per replica, per lattice coordinate) get independent streams
//! while identical coordinates get identical values at every truncation
//! size. That coordinate stability is what makes the builtin samplers and
//! kernels restriction-consistent path by path.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derives a sub-seed from `master`, a purpose label, and coordinates.
pub fn derive(master: u64, label: &str, parts: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update([label.len() as u8]);
    h.update(label.as_bytes());
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// A ChaCha stream seeded from [`derive`].
pub fn rng(master: u64, label: &str, parts: &[u64]) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive(master, label, parts))
}

/// A deterministic uniform value in `[0, 1)` keyed by label and coordinates.
pub fn unit(master: u64, label: &str, parts: &[u64]) -> f64 {
    // 53 high bits, the standard double-precision uniform construction.
    (derive(master, label, parts) >> 11) as f64 / (1u64 << 53) as f64
}

/// A deterministic fair bit keyed by label and coordinates.
pub fn bit(master: u64, label: &str, parts: &[u64]) -> bool {
    derive(master, label, parts) & 1 == 1
}
