//! Deterministic, platform-independent random stream derivation.
//!
//! Every stochastic component takes its randomness from a stream derived
//! here. A stream is identified by the master seed plus a textual scope
//! (`"run/PSO/sphere6d/3/100/7"`, `"chain/2"`, ...), so independent pieces of
//! work get independent generators and reruns with the same seed reproduce
//! results exactly, regardless of thread scheduling or platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive an independent generator for `scope` from `master_seed`.
///
/// The stream is the SHA-256 digest of the seed and scope, so distinct scopes
/// yield statistically independent streams and the mapping is stable across
/// platforms and releases.
pub fn derive_rng(master_seed: u64, scope: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(master_seed, scope))
}

/// Derive a plain `u64` seed for `scope`, for components that derive their
/// own internal streams from a single seed.
pub fn derive_seed(master_seed: u64, scope: &str) -> u64 {
    let bytes = digest(master_seed, scope);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}

fn digest(master_seed: u64, scope: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(scope.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    seed
}
