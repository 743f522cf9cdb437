//! Deterministic, order-independent random streams.
//!
//! Every stochastic experiment derives an independent substream from a
//! 64-bit master seed plus a list of stream ids (experiment, level, sample,
//! ...). Identical `(seed, ids)` yield identical draws regardless of
//! execution order or thread count, which makes parallel Monte Carlo runs
//! bit-reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Environment variable consulted as a master-seed fallback by the CLI.
pub const SEED_ENV_VAR: &str = "ROBQ_SEED";

#[derive(Debug, Clone, Copy)]
pub struct SeededRng {
    pub master_seed: u64,
}

impl SeededRng {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Derive the substream keyed by `ids`.
    pub fn stream(&self, ids: &[u64]) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.master_seed.to_le_bytes());
        for id in ids {
            hasher.update(id.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }
}
