//! Deterministic stream splitting for reproducible parallel sampling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the generator for substream `index` of a master seed.
///
/// Every parallel trial draws from its own counter-indexed stream, so
/// results do not depend on how trials are scheduled across threads.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
