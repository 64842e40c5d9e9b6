//! Counter-split seeding. Every random task owns a ChaCha stream derived from
//! the master seed and its task index, so results do not depend on how tasks
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Derive a child seed for a named sub-experiment.
pub fn child_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
