//! Deterministic random-stream derivation.
//!
//! Every randomized routine draws from a stream derived from one master seed
//! and a textual label, so a run is reproducible from the seed alone and
//! parallel trials see the same randomness regardless of scheduling. Labels
//! follow "graph/{n}/{trial}" for graph sampling and "bp/{trial}" for
//! branching-process trials.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives the child stream for `label` from the master seed: the ChaCha8
/// generator keyed by SHA-256(master little-endian bytes || label bytes).
pub fn child_stream(master: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}
