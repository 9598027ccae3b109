//! Stable per-scene seed derivation.

use sha2::{Digest, Sha256};

/// 64-bit seed for scene `scene_index` of `object_id`, independent of which
/// other objects are in the pool or the order scenes are processed in.
pub fn scene_seed(master_seed: u64, object_id: &str, scene_index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"graspgen/scene-seed/v1");
    h.update(master_seed.to_le_bytes());
    h.update((object_id.len() as u64).to_le_bytes());
    h.update(object_id.as_bytes());
    h.update((scene_index as u64).to_le_bytes());
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(chunks: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for c in chunks {
        h.update(c);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
