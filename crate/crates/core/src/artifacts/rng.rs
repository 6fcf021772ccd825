use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::labels::{Condition, ProcessingMethod};

/// Seed of one generated condition, derived from the master seed and the
/// condition's identity.
pub fn condition_seed(master: u64, item_id: &str, method: ProcessingMethod, condition: Condition) -> u64 {
    let mut h = Sha256::new();
    h.update(b"odaq-condition-seed\0");
    h.update(master.to_le_bytes());
    h.update(item_id.as_bytes());
    h.update([0]);
    h.update(method.as_str().as_bytes());
    h.update([0]);
    h.update(condition.as_str().as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Independent stream `stream` of the generator keyed by `seed`. Streams
/// share the key and differ in the ChaCha stream counter.
pub fn channel_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
