//! Named seed derivation.
//!
//! Every stochastic step draws from a stream keyed by the base seed, a
//! component label and a list of indices (graph, repeat, ...). Streams are
//! therefore independent of iteration order and of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn derive_seed(base: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    for i in indices {
        h.update(i.to_le_bytes());
    }
    let digest = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}

pub fn rng_for(base: u64, label: &str, indices: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, label, indices))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
