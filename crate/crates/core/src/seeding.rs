//! Seed splitting for ensembles.

use sha2::{Digest, Sha256};

/// Seed of task `index` of experiment `label` under `master`.
///
/// The first 8 bytes (little endian) of
/// `SHA-256(master_le || len(label)_le || label || index_le)`. The rule is
/// frozen: changing it changes every generated graph.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}
