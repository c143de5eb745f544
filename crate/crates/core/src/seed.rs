//! Per-record seed derivation.
//!
//! Every random choice in the pipeline is drawn from a ChaCha8 stream seeded by
//! `derive_seed(global, record_id, task)`, so output never depends on which
//! worker handled a record or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::noising::Task;

pub fn derive_seed(global_seed: u64, record_id: &str, task: Task) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update([0u8]);
    h.update(record_id.as_bytes());
    h.update([0u8]);
    h.update(task.tag().as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
